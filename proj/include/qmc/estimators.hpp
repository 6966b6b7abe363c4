#pragma once

// The estimation algorithms: classical Monte Carlo, canonical (QFT-based)
// amplitude estimation, maximum-likelihood amplitude estimation on a depth
// schedule, the beta-interpolated schedule, and parallel splitting into
// independently estimated buckets.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qmc/errors.hpp"
#include "qmc/likelihood.hpp"
#include "qmc/oracle.hpp"
#include "qmc/qae_core.hpp"
#include "qmc/random.hpp"
#include "qmc/schedule.hpp"

namespace qmc {

/// Two-sided 99% standard normal quantile.
inline constexpr double kZ99 = 2.576;

enum class Method { ClassicalMC, CanonicalQAE, MleQAE, KerenidisPrakash, ParallelSplit };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::ClassicalMC: return "classical";
    case Method::CanonicalQAE: return "canonical";
    case Method::MleQAE: return "mle";
    case Method::KerenidisPrakash: return "kp";
    case Method::ParallelSplit: return "parallel";
  }
  return "unknown";
}

struct EstimateReport {
  double a_hat = 0.0;
  double theta_hat = 0.0;
  /// Nominal 99% interval on the amplitude.
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::int64_t total_oracle_calls = 0;
  /// Oracle calls in the deepest circuit, 2 * max_depth + 1.
  std::int64_t max_serial_depth = 0;
  Method method = Method::ClassicalMC;
  /// Converts amplitudes to prices: V = a_hat * value_scale.
  double value_scale = 1.0;

  double value() const noexcept { return a_hat * value_scale; }
  double value_ci_low() const noexcept { return ci_low * value_scale; }
  double value_ci_high() const noexcept { return ci_high * value_scale; }
  double half_width() const noexcept { return 0.5 * (ci_high - ci_low); }
};

namespace detail {

inline EstimateReport make_report(double a_hat, double half_width, std::int64_t calls, std::int64_t serial,
                                  Method method, double scale) {
  EstimateReport r;
  r.a_hat = std::clamp(a_hat, 0.0, 1.0);
  r.theta_hat = std::asin(std::sqrt(r.a_hat));
  r.ci_low = std::clamp(r.a_hat - half_width, 0.0, 1.0);
  r.ci_high = std::clamp(r.a_hat + half_width, 0.0, 1.0);
  r.total_oracle_calls = calls;
  r.max_serial_depth = serial;
  r.method = method;
  r.value_scale = scale;
  return r;
}

}  // namespace detail

/// Sample mean of a record made only of depth-0 entries.
inline double classical_estimate(const MeasurementRecord& record) {
  record.validate();
  std::int64_t shots = 0, hits = 0;
  for (const auto& m : record.entries) {
    if (m.depth != 0) throw DomainError("classical estimate needs depth-0 measurements only");
    shots += m.shots;
    hits += m.hits;
  }
  return static_cast<double>(hits) / static_cast<double>(shots);
}

/// Empirical mean of n_samples depth-0 shots. The interval is the normal
/// approximation with z = 2.576.
inline EstimateReport classical_mc(const OracleSpec& oracle, std::int64_t n_samples, std::uint64_t rng_seed) {
  if (n_samples < 1) throw DomainError("n_samples must be at least 1");
  const Schedule schedule({{0, n_samples}});
  const auto record = run_schedule(oracle, schedule, NoiseModel{}, rng_seed);
  const double a = classical_estimate(record);
  const double half = kZ99 * std::sqrt(a * (1.0 - a)) / std::sqrt(static_cast<double>(n_samples));
  return detail::make_report(a, half, n_samples, 1, Method::ClassicalMC, oracle.value_scale());
}

inline constexpr int kMaxCanonicalBits = 14;

/// Half-width of the standard amplitude-estimation error bound for one
/// outcome: 2 pi sqrt(a(1-a)) / M + pi^2 / M^2 with M = 2^m_bits.
inline double canonical_error_bound(double a, int m_bits) {
  const double M = std::ldexp(1.0, m_bits);
  return 2.0 * std::numbers::pi * std::sqrt(std::max(0.0, a * (1.0 - a))) / M +
         std::numbers::pi * std::numbers::pi / (M * M);
}

/// Textbook phase-estimation amplitude estimation: `shots` independent runs
/// with an m_bits register, each decoded to sin^2(pi y / M); the median of the
/// decoded values is reported.
inline EstimateReport canonical_qae(const OracleSpec& oracle, int m_bits, std::int64_t shots, std::uint64_t rng_seed) {
  if (m_bits < 1 || m_bits > kMaxCanonicalBits) {
    throw SizeError("m_bits must lie in [1, " + std::to_string(kMaxCanonicalBits) + "], got " + std::to_string(m_bits));
  }
  if (shots < 1) throw DomainError("shots must be at least 1");
  const auto probs = qpe_distribution(Theta::from_amplitude(oracle.amplitude()), m_bits);
  std::vector<double> cdf(probs.size());
  std::partial_sum(probs.begin(), probs.end(), cdf.begin());

  CounterRng rng(rng_seed);
  std::vector<double> decoded(static_cast<std::size_t>(shots));
  for (auto& d : decoded) {
    const double u = rng.uniform() * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    d = qpe_estimate_map(static_cast<std::uint64_t>(it - cdf.begin()), m_bits);
  }
  std::sort(decoded.begin(), decoded.end());
  const std::size_t n = decoded.size();
  const double median = n % 2 == 1 ? decoded[n / 2] : 0.5 * (decoded[n / 2 - 1] + decoded[n / 2]);

  const std::int64_t depth = (std::int64_t{1} << m_bits) - 1;
  const std::int64_t serial = 2 * depth + 1;
  return detail::make_report(median, canonical_error_bound(median, m_bits), shots * serial, serial,
                             Method::CanonicalQAE, oracle.value_scale());
}

/// Amplitude estimate and interval from a fitted record. The interval uses
/// the observed Fisher information at the optimum (the expected information
/// when the observed one is not positive), mapped to the amplitude through
/// da/dtheta = sin(2 theta).
inline EstimateReport report_from_record(const MeasurementRecord& record, NoiseModel noise, Method method,
                                         double value_scale) {
  const Theta theta = mle_fit(record, noise);
  double info = observed_information(record, theta, noise);
  if (!(info > 0.0) || !std::isfinite(info)) info = expected_information(record.by_depth(), theta, noise);
  const double a = theta.amplitude();
  double half = 1.0;
  if (info > 0.0 && std::isfinite(info)) half = kZ99 / std::sqrt(info) * std::abs(std::sin(2.0 * theta.radians));
  auto r = detail::make_report(a, half, record.total_calls(), 2 * record.max_depth() + 1, method, value_scale);
  r.theta_hat = theta.radians;
  return r;
}

/// QFT-free amplitude estimation: sample the schedule, then maximize the
/// likelihood.
inline EstimateReport mle_qae(const OracleSpec& oracle, const Schedule& schedule, NoiseModel noise,
                              std::uint64_t rng_seed, unsigned threads = 1) {
  const auto record = run_schedule(oracle, schedule, noise, rng_seed, threads);
  return report_from_record(record, noise, Method::MleQAE, oracle.value_scale());
}

/// Maximum-likelihood estimation over the interpolating schedule for
/// (epsilon, beta).
inline EstimateReport kp_estimate(const OracleSpec& oracle, double epsilon, double beta, NoiseModel noise,
                                  std::uint64_t rng_seed, const KpScheduleOptions& options = {},
                                  unsigned threads = 1) {
  const auto schedule = build_kp_schedule(epsilon, beta, options);
  auto r = mle_qae(oracle, schedule, noise, rng_seed, threads);
  r.method = Method::KerenidisPrakash;
  return r;
}

/// Schedule used for each bucket in parallel_split_estimate: an exponential
/// ramp up to depth round(1 / (sqrt(p) * epsilon)).
inline Schedule parallel_bucket_schedule(std::size_t buckets, double epsilon,
                                         std::int64_t shots_per_round = kDefaultShotsPerRound) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0, 1)");
  const double bucket_eps = std::sqrt(static_cast<double>(buckets)) * epsilon;
  const std::int64_t depth = bucket_eps >= 1.0 ? 0 : std::max<std::int64_t>(1, std::llround(1.0 / bucket_eps));
  return build_ramp_schedule(depth, shots_per_round);
}

/// Stream key of bucket i in parallel_split_estimate.
constexpr std::uint64_t bucket_seed(std::uint64_t rng_seed, std::size_t bucket) noexcept {
  return derive_seed(rng_seed, {0x5b1e7ULL, bucket});
}

/// Splits the estimation into p independently estimated buckets and
/// averages them classically with the given weights.
///
/// Buckets may carry different value scales; the combined amplitude is
/// expressed against the weighted mean scale so that a_hat * value_scale is
/// the weighted sum of bucket values.
inline EstimateReport parallel_split_estimate(std::span<const OracleSpec> buckets, std::span<const double> weights,
                                              double epsilon, std::uint64_t rng_seed, NoiseModel noise = {},
                                              std::int64_t shots_per_round = kDefaultShotsPerRound,
                                              unsigned threads = 1) {
  if (buckets.empty()) throw DomainError("at least one bucket is required");
  if (buckets.size() != weights.size()) {
    throw DimensionError("got " + std::to_string(buckets.size()) + " buckets but " + std::to_string(weights.size()) +
                         " weights");
  }
  double weight_sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("bucket weights must be non-negative");
    weight_sum += w;
  }
  if (std::abs(weight_sum - 1.0) > 1e-9) throw DomainError("bucket weights must sum to 1");

  const auto schedule = parallel_bucket_schedule(buckets.size(), epsilon, shots_per_round);
  std::vector<EstimateReport> parts(buckets.size());
  parallel_for(buckets.size(), threads, [&](std::size_t i) {
    parts[i] = mle_qae(buckets[i], schedule, noise, bucket_seed(rng_seed, i));
  });

  double scale = 0.0, value = 0.0, var = 0.0;
  std::int64_t calls = 0, serial = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& r = parts[i];
    scale += weights[i] * r.value_scale;
    value += weights[i] * r.value();
    const double h = weights[i] * r.half_width() * r.value_scale;
    var += h * h;
    calls += r.total_oracle_calls;
    serial = std::max(serial, r.max_serial_depth);
  }
  if (!(scale > 0.0)) scale = 1.0;
  auto out = detail::make_report(value / scale, std::sqrt(var) / scale, calls, serial, Method::ParallelSplit, scale);
  if (buckets.size() == 1) {
    out = parts.front();
    out.method = Method::ParallelSplit;
  }
  return out;
}

}  // namespace qmc
