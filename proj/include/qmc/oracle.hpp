#pragma once

// Pricing oracles: a discretized lognormal market, a bounded payoff, and the
// reduction of (market, payoff) to a single amplitude in [0, 1].

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qmc/errors.hpp"

namespace qmc {

inline constexpr int kMinGridBits = 2;
inline constexpr int kMaxGridBits = 24;
inline constexpr double kDefaultTruncSigmas = 8.0;

struct MarketParams {
  double spot = 100.0;
  double rate = 0.0;
  double vol = 0.2;
  double maturity = 1.0;
  int grid_bits = 12;
  double trunc_sigmas = kDefaultTruncSigmas;
};

/// Terminal price distribution on 2^grid_bits points, log-uniformly spaced.
class MarketModel {
 public:
  const MarketParams& params() const noexcept { return params_; }
  std::span<const double> prices() const noexcept { return prices_; }
  std::span<const double> probabilities() const noexcept { return probabilities_; }
  std::size_t size() const noexcept { return prices_.size(); }

  double discount_factor() const noexcept {
    return std::exp(-params_.rate * params_.maturity);
  }

  double mean_price() const noexcept {
    long double acc = 0.0L;
    for (std::size_t i = 0; i < prices_.size(); ++i) acc += static_cast<long double>(prices_[i]) * probabilities_[i];
    return static_cast<double>(acc);
  }

 private:
  friend MarketModel discretize_lognormal(const MarketParams&);
  MarketParams params_;
  std::vector<double> prices_;
  std::vector<double> probabilities_;
};

/// Lognormal terminal distribution under the risk-neutral measure.
///
/// Grid log-prices are uniform over mu +/- trunc_sigmas * s with
/// mu = ln(spot) + (rate - vol^2/2) * maturity and s = vol * sqrt(maturity).
/// Each point carries the lognormal density times its price-space cell width,
/// which on a log-uniform grid is proportional to the normal density of the
/// log-price; weights are renormalized to sum to one.
inline MarketModel discretize_lognormal(const MarketParams& p) {
  if (!(p.vol > 0.0)) throw DomainError("volatility must be positive");
  if (!(p.maturity > 0.0)) throw DomainError("maturity must be positive");
  if (!(p.spot > 0.0)) throw DomainError("spot must be positive");
  if (!(p.trunc_sigmas > 0.0)) throw DomainError("trunc_sigmas must be positive");
  if (!std::isfinite(p.rate)) throw DomainError("rate must be finite");
  if (p.grid_bits < kMinGridBits || p.grid_bits > kMaxGridBits) {
    throw SizeError("grid_bits must lie in [" + std::to_string(kMinGridBits) + ", " +
                    std::to_string(kMaxGridBits) + "], got " + std::to_string(p.grid_bits));
  }

  const std::size_t n = std::size_t{1} << p.grid_bits;
  const double stdev = p.vol * std::sqrt(p.maturity);
  const double mu = std::log(p.spot) + (p.rate - 0.5 * p.vol * p.vol) * p.maturity;
  const double step = 2.0 * p.trunc_sigmas / static_cast<double>(n - 1);

  MarketModel m;
  m.params_ = p;
  m.prices_.resize(n);
  m.probabilities_.resize(n);
  long double total = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = -p.trunc_sigmas + step * static_cast<double>(i);
    m.prices_[i] = std::exp(mu + stdev * z);
    const double w = std::exp(-0.5 * z * z);
    m.probabilities_[i] = w;
    total += w;
  }
  for (auto& w : m.probabilities_) w = static_cast<double>(w / total);
  return m;
}

struct EuropeanCall {
  double strike = 0.0;
};

/// Arbitrary non-negative payoff, one value per grid point.
struct BoundedTable {
  std::vector<double> values;
};

struct Payoff {
  std::variant<EuropeanCall, BoundedTable> kind;
  /// Normalization bound; when absent a default is chosen per payoff kind.
  std::optional<double> cap;
};

inline double payoff_value(const Payoff& payoff, const MarketModel& model, std::size_t i) {
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, EuropeanCall>) {
          return std::max(model.prices()[i] - k.strike, 0.0);
        } else {
          return k.values[i];
        }
      },
      payoff.kind);
}

inline void validate_payoff(const Payoff& payoff, const MarketModel& model) {
  if (const auto* call = std::get_if<EuropeanCall>(&payoff.kind)) {
    if (!(call->strike >= 0.0) || !std::isfinite(call->strike)) {
      throw DomainError("strike must be finite and non-negative");
    }
  } else {
    const auto& table = std::get<BoundedTable>(payoff.kind);
    if (table.values.size() != model.size()) {
      throw DimensionError("payoff table has " + std::to_string(table.values.size()) +
                           " values for a grid of " + std::to_string(model.size()));
    }
    for (double v : table.values) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("payoff table values must be finite and >= 0");
    }
  }
  if (payoff.cap && !(*payoff.cap > 0.0 && std::isfinite(*payoff.cap))) {
    throw DomainError("payoff cap must be positive");
  }
}

/// Cap actually used for normalization. Calls default to (max grid price -
/// strike), at least one price unit; tables default to their maximum.
inline double resolve_cap(const Payoff& payoff, const MarketModel& model) {
  if (payoff.cap) return *payoff.cap;
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, EuropeanCall>) {
          return std::max(model.prices().back() - k.strike, 1.0);
        } else {
          const double hi = k.values.empty() ? 0.0 : *std::max_element(k.values.begin(), k.values.end());
          return hi > 0.0 ? hi : 1.0;
        }
      },
      payoff.kind);
}

/// f_hat(x) = min(f(x), cap) / cap, one entry per grid point.
inline std::vector<double> normalized_payoff(const Payoff& payoff, const MarketModel& model) {
  validate_payoff(payoff, model);
  const double cap = resolve_cap(payoff, model);
  std::vector<double> out(model.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::clamp(std::min(payoff_value(payoff, model, i), cap) / cap, 0.0, 1.0);
  }
  return out;
}

struct DirectAmplitude {
  double a = 0.0;
};

struct MarketSource {
  MarketModel model;
  Payoff payoff;
};

/// A pricing problem reduced to one amplitude a in [0, 1] and the factor
/// converting it back to a price: V = amplitude * value_scale.
class OracleSpec {
 public:
  using Source = std::variant<DirectAmplitude, MarketSource>;

  static OracleSpec direct(double a, double value_scale = 1.0) {
    if (!(a >= 0.0 && a <= 1.0)) throw DomainError("amplitude must lie in [0, 1]");
    if (!(value_scale > 0.0) || !std::isfinite(value_scale)) throw DomainError("value scale must be positive");
    return OracleSpec(DirectAmplitude{a}, a, value_scale);
  }

  /// The value scale is the payoff cap, discounted to today.
  static OracleSpec market(MarketModel model, Payoff payoff) {
    const auto f_hat = normalized_payoff(payoff, model);
    const auto probs = model.probabilities();
    long double acc = 0.0L;
    for (std::size_t i = 0; i < f_hat.size(); ++i) acc += static_cast<long double>(probs[i]) * f_hat[i];
    const double a = std::clamp(static_cast<double>(acc), 0.0, 1.0);
    const double scale = resolve_cap(payoff, model) * model.discount_factor();
    return OracleSpec(MarketSource{std::move(model), std::move(payoff)}, a, scale);
  }

  double amplitude() const noexcept { return amplitude_; }
  double value_scale() const noexcept { return value_scale_; }
  double value() const noexcept { return amplitude_ * value_scale_; }
  const Source& source() const noexcept { return source_; }
  bool is_market() const noexcept { return std::holds_alternative<MarketSource>(source_); }

 private:
  OracleSpec(Source s, double a, double scale)
      : source_(std::move(s)), amplitude_(a), value_scale_(scale) {}

  Source source_;
  double amplitude_;
  double value_scale_;
};

inline double amplitude_of(const OracleSpec& oracle) noexcept { return oracle.amplitude(); }

namespace detail {
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0); }
}  // namespace detail

/// Black-Scholes European call, discounted at exp(-rate * maturity).
inline double black_scholes_call(double spot, double strike, double rate, double vol, double maturity) {
  if (!(spot > 0.0)) throw DomainError("spot must be positive");
  if (!(vol > 0.0)) throw DomainError("volatility must be positive");
  if (!(maturity > 0.0)) throw DomainError("maturity must be positive");
  if (!(strike >= 0.0)) throw DomainError("strike must be non-negative");
  const double df = std::exp(-rate * maturity);
  if (strike == 0.0) return spot;
  const double sd = vol * std::sqrt(maturity);
  const double d1 = (std::log(spot / strike) + (rate + 0.5 * vol * vol) * maturity) / sd;
  const double d2 = d1 - sd;
  return spot * detail::norm_cdf(d1) - strike * df * detail::norm_cdf(d2);
}

/// CSV dump of the grid: price,probability,payoff_normalized.
inline void write_grid_csv(std::ostream& os, const MarketModel& model, const Payoff& payoff) {
  const auto f_hat = normalized_payoff(payoff, model);
  os << "price,probability,payoff_normalized\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < model.size(); ++i) {
    os << model.prices()[i] << ',' << model.probabilities()[i] << ',' << f_hat[i] << '\n';
  }
}

/// Splits a market oracle into `buckets` sub-problems of (nearly) equal
/// probability mass over contiguous price ranges. Each bucket is an oracle on
/// the conditional distribution, normalized by its own payoff maximum; the
/// returned weights are the bucket masses.
struct SplitOracle {
  std::vector<OracleSpec> buckets;
  std::vector<double> weights;
};

inline SplitOracle split_market_oracle(const MarketModel& model, const Payoff& payoff, std::size_t buckets) {
  if (buckets == 0) throw DomainError("bucket count must be positive");
  if (buckets > model.size()) throw SizeError("more buckets than grid points");
  validate_payoff(payoff, model);
  const double cap = resolve_cap(payoff, model);
  const auto probs = model.probabilities();
  const double df = model.discount_factor();

  SplitOracle out;
  std::size_t begin = 0;
  long double cumulative = 0.0L;
  for (std::size_t b = 0; b < buckets; ++b) {
    const long double target = static_cast<long double>(b + 1) / static_cast<long double>(buckets);
    std::size_t end = begin;
    long double mass = 0.0L;
    const std::size_t last_allowed = model.size() - (buckets - b - 1);
    while (end < last_allowed && (end == begin || b + 1 == buckets || cumulative + mass + probs[end] / 2.0L <= target)) {
      mass += probs[end];
      ++end;
    }
    long double weighted = 0.0L;
    double local_max = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const double f = std::min(payoff_value(payoff, model, i), cap);
      local_max = std::max(local_max, f);
      weighted += static_cast<long double>(probs[i]) * f;
    }
    const double local_cap = local_max > 0.0 ? local_max : 1.0;
    const double a = mass > 0.0L ? std::clamp(static_cast<double>(weighted / mass / local_cap), 0.0, 1.0) : 0.0;
    out.buckets.push_back(OracleSpec::direct(a, local_cap * df));
    out.weights.push_back(static_cast<double>(mass));
    cumulative += mass;
    begin = end;
  }
  return out;
}

}  // namespace qmc
