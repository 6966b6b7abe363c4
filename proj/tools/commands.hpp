#pragma once

// Command implementations behind the qmc tool. Every command turns a
// RunConfig into a Table; rendering to CSV or JSON is separate so both
// formats carry exactly the same rows.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qmc/config.hpp"
#include "qmc/estimators.hpp"
#include "qmc/resources.hpp"

namespace qmc::cli {

using Cell = std::variant<std::string, std::int64_t, double>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::string render_csv(const Table& t) {
  std::ostringstream os;
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << csv_escape(t.columns[i]);
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      std::visit(
          [&](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, std::string>) {
              os << csv_escape(v);
            } else if constexpr (std::is_same_v<V, double>) {
              os << format_double(v);
            } else {
              os << v;
            }
          },
          row[i]);
    }
    os << '\n';
  }
  return os.str();
}

inline std::string render_json(const Table& t) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json obj;
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::visit([&](const auto& v) { obj[t.columns[i]] = v; }, row[i]);
    }
    arr.push_back(std::move(obj));
  }
  return arr.dump(2) + '\n';
}

inline std::string render(const Table& t, const std::string& format) {
  return format == "json" ? render_json(t) : render_csv(t);
}

// ---- price ------------------------------------------------------------------

inline KpScheduleOptions kp_options(const EstimatorConfig& e) {
  return {.shots_per_round = e.shots, .min_shots = e.min_shots, .ramp_taper = e.ramp_taper,
          .budget_scale = e.budget_scale};
}

/// Equal-mass buckets of a market oracle, or identical copies of a direct one.
inline SplitOracle make_split(const RunConfig& cfg, const OracleSpec& oracle) {
  const auto p = cfg.estimator.buckets;
  if (p < 1) throw DomainError("estimator.buckets must be at least 1");
  if (const auto* m = std::get_if<MarketSource>(&oracle.source())) {
    return split_market_oracle(m->model, m->payoff, static_cast<std::size_t>(p));
  }
  SplitOracle s;
  for (std::int64_t i = 0; i < p; ++i) {
    s.buckets.push_back(oracle);
    s.weights.push_back(1.0 / static_cast<double>(p));
  }
  return s;
}

/// Runs the configured estimator once with the given seed.
inline EstimateReport run_estimator(const RunConfig& cfg, const OracleSpec& oracle, std::uint64_t seed,
                                    unsigned threads) {
  const auto& e = cfg.estimator;
  const NoiseModel noise{e.noise};
  switch (e.method) {
    case Method::ClassicalMC: return classical_mc(oracle, e.n_samples, seed);
    case Method::CanonicalQAE: return canonical_qae(oracle, e.m_bits, e.shots, seed);
    case Method::MleQAE:
      return mle_qae(oracle, build_exp_schedule(e.max_depth_exponent, e.shots), noise, seed, threads);
    case Method::KerenidisPrakash:
      return kp_estimate(oracle, e.epsilon, e.beta, noise, seed, kp_options(e), threads);
    case Method::ParallelSplit: {
      const auto split = make_split(cfg, oracle);
      return parallel_split_estimate(split.buckets, split.weights, e.epsilon, seed, noise, e.shots, threads);
    }
  }
  throw DomainError("unknown method");
}

inline const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> cols{
      "method",   "a_hat",        "theta_hat",     "ci_low",      "ci_high",           "value",
      "value_ci_low", "value_ci_high", "value_scale", "total_oracle_calls", "max_serial_depth"};
  return cols;
}

inline std::vector<Cell> report_row(const EstimateReport& r) {
  return {std::string(to_string(r.method)), r.a_hat, r.theta_hat, r.ci_low, r.ci_high, r.value(),
          r.value_ci_low(), r.value_ci_high(), r.value_scale, r.total_oracle_calls, r.max_serial_depth};
}

inline Table cmd_price(const RunConfig& cfg) {
  const auto seed = cfg.require_seed();
  const auto oracle = make_oracle(cfg.oracle);
  return {report_columns(), {report_row(run_estimator(cfg, oracle, seed, cfg.threads))}};
}

/// Refits a measurement record (depth,shots,hits CSV) by maximum likelihood.
inline Table cmd_fit(const RunConfig& cfg, const std::string& record_path) {
  std::ifstream in(record_path);
  if (!in) throw ConfigError("cannot open record file '" + record_path + "'");
  const auto record = read_record_csv(in);
  const auto oracle = make_oracle(cfg.oracle);
  const auto r = report_from_record(record, NoiseModel{cfg.estimator.noise}, Method::MleQAE, oracle.value_scale());
  return {report_columns(), {report_row(r)}};
}

/// Samples the configured schedule (exponential, or the interpolating one for
/// method kp) and emits the raw record.
inline Table cmd_record(const RunConfig& cfg) {
  const auto seed = cfg.require_seed();
  const auto& e = cfg.estimator;
  const auto oracle = make_oracle(cfg.oracle);
  const auto schedule = e.method == Method::KerenidisPrakash ? build_kp_schedule(e.epsilon, e.beta, kp_options(e))
                                                             : build_exp_schedule(e.max_depth_exponent, e.shots);
  const auto record = run_schedule(oracle, schedule, NoiseModel{e.noise}, seed, cfg.threads);
  Table t{{"depth", "shots", "hits"}, {}};
  for (const auto& m : record.entries) t.rows.push_back({m.depth, m.shots, m.hits});
  return t;
}

// ---- sweep ------------------------------------------------------------------

struct SweepPoint {
  std::string param;
  EstimatorConfig estimator;
};

inline std::vector<SweepPoint> sweep_points(const RunConfig& cfg) {
  std::vector<SweepPoint> points;
  const auto& sw = cfg.sweep;
  auto values = sw.values;
  switch (sw.param) {
    case SweepConfig::Param::NSamples:
      if (values.empty()) values = {1e2, 1e3, 1e4, 1e5, 1e6};
      for (double v : values) {
        auto e = cfg.estimator;
        e.method = Method::ClassicalMC;
        e.n_samples = std::llround(v);
        points.push_back({std::to_string(e.n_samples), e});
      }
      break;
    case SweepConfig::Param::MaxDepthExponent:
      if (values.empty()) values = {2, 3, 4, 5, 6, 7, 8, 9, 10};
      for (double v : values) {
        auto e = cfg.estimator;
        e.method = Method::MleQAE;
        e.max_depth_exponent = static_cast<int>(std::lround(v));
        points.push_back({std::to_string(e.max_depth_exponent), e});
      }
      break;
    case SweepConfig::Param::Epsilon:
      if (values.empty()) values = {std::pow(10.0, -1.5), 1e-2, std::pow(10.0, -2.5), 1e-3};
      for (double beta : sw.betas) {
        for (double v : values) {
          auto e = cfg.estimator;
          e.method = Method::KerenidisPrakash;
          e.epsilon = v;
          e.beta = beta;
          points.push_back({"epsilon=" + format_double(v) + ";beta=" + format_double(beta), e});
        }
      }
      break;
  }
  return points;
}

/// Convergence sweep: `trials` seeded runs per grid point. Trial t of point i
/// uses derive_seed(seed, {i, t}); errors are in value units against the
/// exact oracle value and aggregated in trial order.
inline Table cmd_sweep(const RunConfig& cfg) {
  const auto seed = cfg.require_seed();
  if (cfg.sweep.trials < 1) throw DomainError("sweep.trials must be at least 1");
  const auto oracle = make_oracle(cfg.oracle);
  const auto points = sweep_points(cfg);
  const auto trials = static_cast<std::size_t>(cfg.sweep.trials);

  std::vector<EstimateReport> results(points.size() * trials);
  parallel_for(results.size(), cfg.threads, [&](std::size_t job) {
    const std::size_t i = job / trials, t = job % trials;
    RunConfig local = cfg;
    local.estimator = points[i].estimator;
    results[job] = run_estimator(local, oracle, derive_seed(seed, {i, t}), 1);
  });

  Table table{{"method", "param", "total_calls", "max_serial_depth", "rmse", "mean_abs_err"}, {}};
  for (std::size_t i = 0; i < points.size(); ++i) {
    double sq = 0.0, abs_sum = 0.0;
    std::int64_t calls = 0, serial = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      const auto& r = results[i * trials + t];
      const double err = r.value() - oracle.value();
      sq += err * err;
      abs_sum += std::abs(err);
      calls = std::max(calls, r.total_oracle_calls);
      serial = std::max(serial, r.max_serial_depth);
    }
    const auto n = static_cast<double>(trials);
    table.rows.push_back({std::string(to_string(points[i].estimator.method)), points[i].param, calls, serial,
                          std::sqrt(sq / n), abs_sum / n});
  }
  return table;
}

// ---- resource tables --------------------------------------------------------

inline Table cmd_tradeoff(const RunConfig& cfg) {
  Table t{{"epsilon", "beta", "classical_samples", "serial_samples", "allowed_error", "speedup", "total_calls",
           "classical_samples_display", "serial_samples_display", "allowed_error_display", "speedup_display",
           "note"},
          {}};
  for (double eps : cfg.tradeoff.epsilons) {
    for (double beta : cfg.tradeoff.betas) {
      const auto r = tradeoff_row({eps, beta, cfg.tradeoff.fidelity});
      t.rows.push_back({r.epsilon, r.beta, r.classical_samples, r.serial_samples, r.allowed_error, r.speedup,
                        r.total_calls, format_display(round_sig1(r.classical_samples)),
                        format_display(round_count(static_cast<double>(r.serial_samples))),
                        format_display(round_sig1(r.allowed_error)), format_display(round_count(r.speedup)),
                        r.note});
    }
  }
  return t;
}

inline Table cmd_hardware_map(const RunConfig& cfg) {
  const auto& h = cfg.hardware;
  Table t{{"gates_per_sample", "clock_ratio", "gate_error", "epsilon", "regime", "net_speedup",
           "max_serial_samples", "max_depth"},
          {}};
  for (double r : h.clock_ratios) {
    for (double g : h.gate_errors) {
      const auto reg = classify_hardware({h.gates_per_sample, g, r}, h.epsilon, h.fidelity);
      t.rows.push_back({h.gates_per_sample, r, g, h.epsilon, std::string(to_string(reg.tag)), reg.net_speedup,
                        reg.max_serial_samples, reg.max_depth});
    }
  }
  return t;
}

/// The interpolating schedule for (estimator.epsilon, estimator.beta), one
/// row per entry plus a final totals row.
inline Table cmd_schedule(const RunConfig& cfg) {
  const auto& e = cfg.estimator;
  const auto s = build_kp_schedule(e.epsilon, e.beta, kp_options(e));
  Table t{{"entry", "depth", "shots", "calls_per_shot", "calls"}, {}};
  std::int64_t shots = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& en = s.entries()[i];
    shots += en.shots;
    t.rows.push_back({std::to_string(i), en.depth, en.shots, en.calls_per_shot(), en.total_calls()});
  }
  t.rows.push_back({std::string("total"), s.max_depth(), shots, s.max_serial_calls(), s.total_calls()});
  return t;
}

inline Table cmd_resources(const RunConfig& cfg) {
  const auto& e = cfg.estimator;
  Table t{{"algorithm", "qubits", "depth", "calls"}, {}};
  for (auto a : {Algorithm::AE, Algorithm::QFTFreeAE, Algorithm::ParallelCounting, Algorithm::KP}) {
    const auto row = algorithm_resources(a, cfg.resources.qubits, cfg.resources.depth, e.epsilon, e.beta);
    t.rows.push_back({std::string(to_string(a)), row.qubits, row.depth, row.calls});
  }
  return t;
}

inline Table cmd_grid(const RunConfig& cfg) {
  if (cfg.oracle.source != OracleConfig::Source::Market) throw ConfigError("grid needs oracle.source=market");
  const auto model = discretize_lognormal(cfg.oracle.market);
  const Payoff payoff{EuropeanCall{cfg.oracle.strike}, cfg.oracle.cap};
  const auto f_hat = normalized_payoff(payoff, model);
  Table t{{"price", "probability", "payoff_normalized"}, {}};
  for (std::size_t i = 0; i < model.size(); ++i) {
    t.rows.push_back({model.prices()[i], model.probabilities()[i], f_hat[i]});
  }
  return t;
}

}  // namespace qmc::cli
