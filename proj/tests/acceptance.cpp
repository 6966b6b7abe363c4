// Acceptance suite. Prints one PASS/FAIL line per criterion with the measured
// quantities and wall time; exits non-zero if any criterion fails.
//
// Usage: qmc_acceptance [path-to-qmc-tool]
// With a tool path, criterion 11 also checks the built executable end to end.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "commands.hpp"
#include "qmc/estimators.hpp"
#include "qmc/resources.hpp"
#include "reference.hpp"

using namespace qmc;
using std::numbers::pi;

namespace {

constexpr std::uint64_t kSeed = 20240611;
const unsigned kThreads = std::max(1u, std::thread::hardware_concurrency());

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// RMSE over `trials` runs; trial t of sweep point `point` in criterion `crit`
// uses derive_seed(kSeed, {crit, point, t}).
template <typename Run>
double rmse_over(std::uint64_t crit, std::uint64_t point, int trials, double truth, Run&& run,
                 std::vector<EstimateReport>* keep = nullptr) {
  std::vector<EstimateReport> out(static_cast<std::size_t>(trials));
  parallel_for(out.size(), kThreads, [&](std::size_t t) { out[t] = run(derive_seed(kSeed, {crit, point, t})); });
  double se = 0.0;
  for (const auto& r : out) se += (r.a_hat - truth) * (r.a_hat - truth);
  if (keep) keep->insert(keep->end(), out.begin(), out.end());
  return std::sqrt(se / trials);
}

// ---- 1: tradeoff table --------------------------------------------------------

struct PrintedRow {
  double eps;
  double classical;
  // {serial, allowed error, speedup} for beta = 2/3, 1/3, 0.
  std::array<std::array<double, 3>, 3> kp;
};

// Values as printed in the published tradeoff table.
const std::array<PrintedRow, 4> kPrinted{{
    {1e-2, 1e4, {{{11, 9e-4, 5}, {45, 2e-4, 22}, {2e2, 5e-5, 1e2}}}},
    {1e-3, 1e6, {{{21, 5e-4, 10}, {2e2, 5e-5, 1e2}, {2e3, 5e-6, 1e3}}}},
    {1e-4, 1e8, {{{45, 2e-4, 22}, {9e2, 1e-5, 5e2}, {2e4, 5e-7, 1e4}}}},
    {1e-5, 1e10, {{{93, 1e-5, 46}, {4e3, 2e-6, 2e3}, {2e5, 5e-8, 1e5}}}},
}};

bool same(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); }

Outcome criterion_tradeoff() {
  RunConfig cfg;
  const auto table = cli::cmd_tradeoff(cfg);
  auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
      if (table.columns[i] == name) return i;
    }
    throw std::runtime_error("missing column " + name);
  };
  auto num = [&](std::size_t row, const std::string& name) {
    const auto& c = table.rows[row][col(name)];
    if (const auto* d = std::get_if<double>(&c)) return *d;
    return static_cast<double>(std::get<std::int64_t>(c));
  };
  const std::array<double, 4> betas{1.0, 2.0 / 3.0, 1.0 / 3.0, 0.0};
  int matched = 0, mismatched = 0;
  std::string bad;
  bool flagged_ok = false;
  for (std::size_t e = 0; e < kPrinted.size(); ++e) {
    const auto& printed = kPrinted[e];
    for (std::size_t b = 0; b < betas.size(); ++b) {
      const std::size_t row = e * betas.size() + b;
      if (!same(num(row, "epsilon"), printed.eps) || !same(num(row, "beta"), betas[b])) {
        return {false, "unexpected row order"};
      }
      auto check = [&](bool ok, const char* what) {
        ok ? ++matched : ++mismatched;
        if (!ok) bad += fmt(" %s(eps=%g,beta=%.3f)", what, printed.eps, betas[b]);
      };
      if (b == 0) {
        check(same(round_sig1(num(row, "classical_samples")), printed.classical), "classical");
        continue;
      }
      const auto& cells = printed.kp[b - 1];
      check(same(round_count(num(row, "serial_samples")), cells[0]), "serial");
      check(same(round_count(num(row, "speedup")), cells[2]), "speedup");
      const double allowed = num(row, "allowed_error");
      const auto& note = std::get<std::string>(table.rows[row][col("note")]);
      if (e == 3 && b == 1) {
        // Flagged cell: the formula value 0.01/93, annotated.
        flagged_ok = same(allowed, 0.01 / 93.0) && !note.empty();
        check(flagged_ok, "flagged-allowed");
      } else {
        check(same(round_sig1(allowed), cells[1]) && note.empty(), "allowed");
      }
    }
  }
  return {mismatched == 0, fmt("%d/%d cells match; flagged cell = 0.01/93 with note: %s%s", matched,
                               matched + mismatched, flagged_ok ? "yes" : "no", bad.c_str())};
}

// ---- 2: algorithm table -------------------------------------------------------

Outcome criterion_algorithms() {
  const auto kp = algorithm_resources(Algorithm::KP, 10, 100, 1e-2, 0.5);
  const bool kp_ok = same(kp.depth, 1e3) && same(kp.calls, 1e3) && kp.qubits == 10;
  const bool ae_ok = same(algorithm_resources(Algorithm::AE, 10, 100, 1e-3).calls, 1e3);
  bool coincide = true;
  for (double eps : {0.1, 1e-2, 1e-3, 1e-5}) {
    const auto k0 = algorithm_resources(Algorithm::KP, 10, 100, eps, 0.0);
    const auto qf = algorithm_resources(Algorithm::QFTFreeAE, 10, 100, eps, 0.0);
    coincide = coincide && same(k0.depth, qf.depth) && same(k0.calls, qf.calls);
  }
  return {kp_ok && ae_ok && coincide,
          fmt("KP(n=10,d=100,eps=1e-2,beta=1/2) depth=%g calls=%g; AE(eps=1e-3) calls=%g; KP(beta=0)==QFT-free: %s",
              kp.depth, kp.calls, algorithm_resources(Algorithm::AE, 10, 100, 1e-3).calls, coincide ? "yes" : "no")};
}

// ---- 3: classical scaling ------------------------------------------------------

Outcome criterion_classical() {
  const auto o = OracleSpec::direct(0.3);
  std::vector<double> n, rmse;
  for (std::uint64_t i = 0; i < 5; ++i) {
    const auto samples = static_cast<std::int64_t>(std::llround(std::pow(10.0, 2 + i)));
    n.push_back(static_cast<double>(samples));
    rmse.push_back(rmse_over(3, i, 200, 0.3, [&](std::uint64_t s) { return classical_mc(o, samples, s); }));
  }
  const double slope = ref::loglog_slope(n, rmse);
  return {std::abs(slope + 0.5) <= 0.05, fmt("slope %.4f (target -0.5 +/- 0.05), rmse@1e6 = %.3e", slope, rmse.back())};
}

// ---- 4: Heisenberg scaling -----------------------------------------------------

Outcome criterion_heisenberg() {
  const auto o = OracleSpec::direct(0.3);
  std::vector<double> calls, rmse;
  for (int K = 2; K <= 10; ++K) {
    const auto s = build_exp_schedule(K, 100);
    calls.push_back(static_cast<double>(s.total_calls()));
    rmse.push_back(rmse_over(4, static_cast<std::uint64_t>(K), 100, 0.3,
                             [&](std::uint64_t seed) { return mle_qae(o, s, {}, seed); }));
  }
  const double slope = ref::loglog_slope(calls, rmse);
  return {slope >= -1.1 && slope <= -0.85, fmt("slope %.4f over K=2..10 (target [-1.1, -0.85])", slope)};
}

// ---- 5 and 10: interpolated scaling and the depth-parallelism law ----------------

struct KpPoint {
  double beta, eps;
  std::int64_t calls, serial;
  double rmse;
};

// Constant factor on the call budget for the interpolated runs. The
// accounting (1/eps)^(1+beta) fixes only the exponent; at the smallest
// budgets (a few hundred calls) the likelihood has aliased peaks and the
// estimator is not yet in its asymptotic regime without some headroom.
const KpScheduleOptions kKpAcceptance{.shots_per_round = 100, .min_shots = 1, .ramp_taper = 1, .budget_scale = 30.0};

std::vector<KpPoint> kp_runs;
bool kp_depth_ok = true;

Outcome criterion_kp() {
  const auto o = OracleSpec::direct(0.3);
  std::string detail;
  bool pass = true;
  const std::array<double, 4> betas{1.0 / 3.0, 2.0 / 3.0, 0.0, 1.0};
  for (std::size_t b = 0; b < betas.size(); ++b) {
    const double beta = betas[b];
    std::vector<double> calls, rmse;
    for (int j = 0; j <= 6; ++j) {
      const double eps = std::pow(10.0, -1.5 - 0.25 * j);
      std::vector<EstimateReport> reports;
      const double r = rmse_over(
          5, b * 16 + static_cast<std::uint64_t>(j), 50, 0.3,
          [&](std::uint64_t s) { return kp_estimate(o, eps, beta, {}, s, kKpAcceptance); }, &reports);
      const auto cap = static_cast<std::int64_t>(std::ceil(std::pow(1.0 / eps, 1.0 - beta) - 1e-9));
      for (const auto& rep : reports) kp_depth_ok = kp_depth_ok && rep.max_serial_depth <= 2 * cap + 1;
      kp_runs.push_back({beta, eps, reports.front().total_oracle_calls, reports.front().max_serial_depth, r});
      calls.push_back(static_cast<double>(reports.front().total_oracle_calls));
      rmse.push_back(r);
    }
    const double slope = ref::loglog_slope(calls, rmse);
    const double target = -1.0 / (1.0 + beta);
    if (b < 2) {
      pass = pass && std::abs(slope - target) <= 0.1;
      detail += fmt("beta=%.3f slope %.4f (target %.3f +/- 0.1); ", beta, slope, target);
    } else {
      detail += fmt("[info] beta=%.0f slope %.3f; ", beta, slope);
    }
  }
  detail += fmt("max_serial_depth <= 2ceil((1/eps)^(1-beta))+1 in every run: %s", kp_depth_ok ? "yes" : "no");
  return {pass && kp_depth_ok, detail};
}

Outcome criterion_zalka() {
  if (kp_runs.empty()) return {false, "no interpolated runs recorded"};
  double worst = INFINITY;
  const KpPoint* arg = nullptr;
  for (const auto& r : kp_runs) {
    const double D = static_cast<double>(r.serial);
    const double p = static_cast<double>(r.calls) / D;
    const double ratio = p * D * D / (0.1 / (r.rmse * r.rmse));
    if (ratio < worst) {
      worst = ratio;
      arg = &r;
    }
  }
  return {worst >= 1.0, fmt("%zu (beta, eps) points; min p*D^2 / (0.1/eps_achieved^2) = %.3g at beta=%.3f eps=%.2e",
                            kp_runs.size(), worst, arg->beta, arg->eps)};
}

// ---- 6: canonical interval --------------------------------------------------------

Outcome criterion_canonical() {
  const auto o = OracleSpec::direct(0.3);
  const double bound = pi / 1024.0 * 2.0 * std::sqrt(0.21) + pi * pi / (1024.0 * 1024.0);
  int inside = 0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    const auto r = canonical_qae(o, 10, 31, derive_seed(kSeed, {6, t}));
    if (std::abs(r.a_hat - 0.3) <= bound) ++inside;
  }
  return {inside >= 95, fmt("%d/100 runs within %.3e (need >= 95)", inside, bound)};
}

// ---- 7: phase-estimation distribution ----------------------------------------------

Outcome criterion_qpe() {
  std::mt19937_64 gen(kSeed);
  std::uniform_real_distribution<double> th(0.0, pi / 2);
  double worst_entry = 0.0, worst_sum = 0.0;
  for (int m : {4, 8, 12}) {
    std::vector<double> thetas(100);
    for (auto& t : thetas) t = th(gen);
    std::vector<double> entry(100), sum(100);
    parallel_for(thetas.size(), kThreads, [&](std::size_t i) {
      const auto fast = qpe_distribution(Theta{thetas[i]}, m);
      const auto slow = ref::qpe_dft(thetas[i], m);
      long double s = 0.0L;
      double e = 0.0;
      for (std::size_t y = 0; y < fast.size(); ++y) {
        e = std::max(e, std::abs(fast[y] - slow[y]));
        s += fast[y];
      }
      entry[i] = e;
      sum[i] = std::abs(static_cast<double>(s - 1.0L));
    });
    for (int i = 0; i < 100; ++i) {
      worst_entry = std::max(worst_entry, entry[i]);
      worst_sum = std::max(worst_sum, sum[i]);
    }
  }
  return {worst_entry <= 1e-10 && worst_sum <= 1e-10,
          fmt("max |closed form - DFT| = %.2e, max |sum - 1| = %.2e (tolerance 1e-10)", worst_entry, worst_sum)};
}

// ---- 8: noise floor ------------------------------------------------------------

Outcome criterion_noise_floor() {
  const auto o = OracleSpec::direct(0.3);
  const NoiseModel q{1e-3};
  // Trials share seeds across K, so consecutive schedules see identical
  // records on their common entries and the comparison is paired.
  std::vector<double> rmse;
  std::vector<std::int64_t> serial;
  std::string detail;
  for (int K = 6; K <= 14; ++K) {
    const auto s = build_exp_schedule(K, 100);
    serial.push_back(s.max_serial_calls());
    rmse.push_back(rmse_over(8, 0, 100, 0.3, [&](std::uint64_t seed) { return mle_qae(o, s, q, seed); }));
  }
  bool pass = true;
  bool saw_floor = false;
  for (std::size_t i = 0; i + 1 < rmse.size(); ++i) {
    const double gain = (rmse[i] - rmse[i + 1]) / rmse[i];
    detail += fmt("%lld:%.2e ", static_cast<long long>(serial[i]), rmse[i]);
    if (serial[i] > 2000) {
      saw_floor = true;
      pass = pass && gain < 0.10;
    }
  }
  detail += fmt("%lld:%.2e", static_cast<long long>(serial.back()), rmse.back());
  const double early_gain = rmse.front() / rmse[3];
  return {pass && saw_floor, fmt("serial:rmse %s; improvement per doubling past 2e3 calls < 10%%: %s; "
                                 "early 8x depth gain %.1fx",
                                 detail.c_str(), pass ? "yes" : "no", early_gain)};
}

// ---- 9: pricing end to end ------------------------------------------------------

Outcome criterion_pricing() {
  const double bs = black_scholes_call(100, 100, 0, 0.2, 1);
  const double integ = ref::call_by_integration(100, 100, 0, 0.2, 1);
  const bool ref_ok = std::abs(bs - 7.9656) < 5e-5 && std::abs(integ - 7.9656) < 5e-5;
  const auto model =
      discretize_lognormal({.spot = 100, .rate = 0, .vol = 0.2, .maturity = 1, .grid_bits = 12});
  const auto o400 = OracleSpec::market(model, Payoff{EuropeanCall{100.0}, 400.0});
  const auto odef = OracleSpec::market(model, Payoff{EuropeanCall{100.0}, {}});
  const double rel400 = std::abs(o400.amplitude() * 400.0 - 7.9656) / 7.9656;
  const double reldef = std::abs(odef.value() - 7.9656) / 7.9656;
  return {ref_ok && rel400 <= 0.01 && reldef <= 0.01,
          fmt("BS %.6f, integration %.6f; a*cap (cap 400) rel err %.2e, default cap %.1f rel err %.2e", bs, integ,
              rel400, odef.value_scale(), reldef)};
}

// ---- 11: determinism -------------------------------------------------------------

std::string run_tool(const std::string& cmd) {
  std::string out;
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
  if (!pipe) return "<popen failed>";
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe.get())) > 0) out.append(buf, n);
  return out;
}

Outcome criterion_determinism(const char* tool) {
  int checks = 0, failures = 0;
  auto expect = [&](bool ok) { ++checks; failures += ok ? 0 : 1; };

  for (const char* m : {"classical", "canonical", "mle", "kp", "parallel"}) {
    for (const char* src : {"direct", "market"}) {
      RunConfig c;
      set_config_value(c, "seed", "17");
      set_config_value(c, "estimator.method", m);
      set_config_value(c, "oracle.source", src);
      finalize_config(c);
      const auto a = cli::render_csv(cli::cmd_price(c));
      expect(a == cli::render_csv(cli::cmd_price(c)));
      c.threads = 4;
      expect(a == cli::render_csv(cli::cmd_price(c)));
    }
  }
  for (const char* param : {"n_samples", "max_depth_exponent", "epsilon"}) {
    RunConfig c;
    set_config_value(c, "seed", "17");
    set_config_value(c, "sweep.param", param);
    set_config_value(c, "sweep.trials", "10");
    if (std::string(param) == "max_depth_exponent") set_config_value(c, "sweep.values", "2,5,8");
    if (std::string(param) == "n_samples") set_config_value(c, "sweep.values", "100,10000");
    finalize_config(c);
    const auto serial = cli::render_csv(cli::cmd_sweep(c));
    expect(serial == cli::render_csv(cli::cmd_sweep(c)));
    c.threads = 4;
    expect(serial == cli::render_csv(cli::cmd_sweep(c)));
    c.output.format = "json";
    expect(cli::render_json(cli::cmd_sweep(c)) == cli::render_json(cli::cmd_sweep(c)));
  }
  RunConfig rec;
  set_config_value(rec, "seed", "5");
  finalize_config(rec);
  expect(cli::render_csv(cli::cmd_record(rec)) == cli::render_csv(cli::cmd_record(rec)));

  std::string tool_note = "tool not given";
  if (tool) {
    const std::string base = std::string(tool) +
                             " --seed 31 --set sweep.param=epsilon --set sweep.trials=10 "
                             "--set sweep.values=0.03,0.01 sweep";
    const auto a = run_tool(base + " --threads 1");
    const auto b = run_tool(base + " --threads 1");
    const auto c = run_tool(base + " --threads 4");
    expect(!a.empty() && a == b && a == c);
    const auto p1 = run_tool(std::string(tool) + " price --seed 31 --format json");
    expect(!p1.empty() && p1 == run_tool(std::string(tool) + " price --seed 31 --format json --threads 3"));
    tool_note = "tool checked";
  }
  return {failures == 0, fmt("%d/%d byte-identical comparisons (%s)", checks - failures, checks, tool_note.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  const char* tool = argc > 1 ? argv[1] : nullptr;
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "tradeoff table reproduction", 1, criterion_tradeoff},
      {2, "algorithm resource formulas", 1, criterion_algorithms},
      {3, "classical scaling", 120, criterion_classical},
      {4, "Heisenberg scaling", 300, criterion_heisenberg},
      {5, "interpolated scaling", 600, criterion_kp},
      {6, "canonical QAE interval", 60, criterion_canonical},
      {7, "phase-estimation distribution", 60, criterion_qpe},
      {8, "noise floor", 300, criterion_noise_floor},
      {9, "pricing end to end", 1, criterion_pricing},
      {10, "depth-parallelism law", 60, criterion_zalka},
      {11, "determinism", 300, [tool] { return criterion_determinism(tool); }},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    failed += pass ? 0 : 1;
    std::printf("[%s] %2d %-32s %s (%.2fs, budget %.0fs%s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, c.budget_s, in_time ? "" : ", OVER BUDGET");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
