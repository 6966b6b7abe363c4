#pragma once

// Back-of-the-envelope resource model: classical vs quantum sample counts,
// circuit depth, tolerable per-sample error, clock-speed erosion of the
// speedup, and classification of hardware into speedup regimes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>
#include <string_view>

#include "qmc/errors.hpp"
#include "qmc/schedule.hpp"

namespace qmc {

inline constexpr double kDefaultFidelity = 0.99;

namespace detail {

inline void check_accuracy(double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw DomainError("epsilon must lie in (0, 1]");
}

inline void check_beta(double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw DomainError("beta must lie in [0, 1]");
}

inline void check_fidelity(double fidelity) {
  if (!(fidelity > 0.0 && fidelity < 1.0)) throw DomainError("fidelity target must lie in (0, 1)");
}

}  // namespace detail

struct TradeoffPoint {
  double epsilon = 1e-3;
  double beta = 0.0;
  double fidelity_target = kDefaultFidelity;
};

/// 1 / eps^2.
inline double classical_samples(double epsilon) {
  detail::check_accuracy(epsilon);
  return 1.0 / (epsilon * epsilon);
}

/// Grover depth of the deepest circuit: (1/eps)^(1-beta) rounded to nearest.
inline std::int64_t grover_depth(double epsilon, double beta) {
  detail::check_accuracy(epsilon);
  detail::check_beta(beta);
  return std::max<std::int64_t>(1, std::llround(std::pow(1.0 / epsilon, 1.0 - beta)));
}

/// Oracle calls executed in series by the deepest circuit, 2 D + 1.
inline std::int64_t serial_samples(double epsilon, double beta) { return 2 * grover_depth(epsilon, beta) + 1; }

/// (1/eps)^(1+beta).
inline double total_calls(double epsilon, double beta) {
  detail::check_accuracy(epsilon);
  detail::check_beta(beta);
  return std::pow(1.0 / epsilon, 1.0 + beta);
}

/// (1/eps)^(1-beta): classical samples over quantum calls.
inline double speedup(double epsilon, double beta) {
  detail::check_accuracy(epsilon);
  detail::check_beta(beta);
  return std::pow(1.0 / epsilon, 1.0 - beta);
}

/// Per-sample error rate such that the deepest circuit still meets the
/// fidelity target: (1 - F) / serial_samples.
inline double allowed_sample_error(double epsilon, double beta, double fidelity_target = kDefaultFidelity) {
  detail::check_fidelity(fidelity_target);
  return (1.0 - fidelity_target) / static_cast<double>(serial_samples(epsilon, beta));
}

inline double net_speedup(double epsilon, double beta, double clock_ratio) {
  if (!(clock_ratio >= 1.0) || !std::isfinite(clock_ratio)) throw DomainError("clock ratio must be >= 1");
  return speedup(epsilon, beta) / clock_ratio;
}

/// Two-qubit gates per oracle call, error per gate, and how many times slower
/// one quantum sample is than one classical sample.
struct HardwareProfile {
  double gates_per_sample = 1e3;
  double gate_error = 1e-6;
  double clock_ratio = 1.0;

  void validate() const {
    if (!(gates_per_sample >= 1.0) || !std::isfinite(gates_per_sample)) throw DomainError("gates per sample must be >= 1");
    if (!(gate_error >= 0.0 && gate_error <= 1.0)) throw DomainError("gate error must lie in [0, 1]");
    if (!(clock_ratio >= 1.0) || !std::isfinite(clock_ratio)) throw DomainError("clock ratio must be >= 1");
  }
};

enum class RegimeTag { Infeasible, Slowdown, PartialSpeedup, FullSpeedup };

inline std::string_view to_string(RegimeTag t) {
  switch (t) {
    case RegimeTag::Infeasible: return "infeasible";
    case RegimeTag::Slowdown: return "slowdown";
    case RegimeTag::PartialSpeedup: return "partial";
    case RegimeTag::FullSpeedup: return "full";
  }
  return "unknown";
}

struct Regime {
  RegimeTag tag = RegimeTag::Infeasible;
  double net_speedup = 0.0;
  /// Serial oracle calls affordable within the fidelity budget.
  double max_serial_samples = 0.0;
  /// Grover depth actually used, capped at ceil(1/eps).
  double max_depth = 0.0;
};

/// Places a hardware profile on the regime map for target accuracy eps.
///
/// The per-sample error is linearized as G * g. A circuit of c serial samples
/// keeps fidelity F while c * G * g <= 1 - F, so at least one Grover iterate
/// (three samples) must fit. The usable depth is capped at ceil(1/eps), where
/// the full quadratic speedup is reached.
inline Regime classify_hardware(const HardwareProfile& hw, double epsilon, double fidelity_target = kDefaultFidelity) {
  hw.validate();
  detail::check_accuracy(epsilon);
  detail::check_fidelity(fidelity_target);
  const double per_sample = hw.gates_per_sample * hw.gate_error;
  Regime r;
  r.max_serial_samples =
      per_sample > 0.0 ? (1.0 - fidelity_target) / per_sample : std::numeric_limits<double>::infinity();
  if (r.max_serial_samples < 3.0) return r;

  const double full_depth = static_cast<double>(detail::robust_ceil(1.0 / epsilon));
  r.max_depth = std::min(std::floor((r.max_serial_samples - 1.0) / 2.0), full_depth);
  r.net_speedup = r.max_depth / hw.clock_ratio;
  if (r.net_speedup <= 1.0) {
    r.tag = RegimeTag::Slowdown;
  } else if (r.max_depth >= full_depth) {
    r.tag = RegimeTag::FullSpeedup;
  } else {
    r.tag = RegimeTag::PartialSpeedup;
  }
  return r;
}

enum class Algorithm { AE, QFTFreeAE, ParallelCounting, KP };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::AE: return "ae";
    case Algorithm::QFTFreeAE: return "qft-free-ae";
    case Algorithm::ParallelCounting: return "parallel-counting";
    case Algorithm::KP: return "kp";
  }
  return "unknown";
}

inline Algorithm parse_algorithm(std::string_view s) {
  for (auto a : {Algorithm::AE, Algorithm::QFTFreeAE, Algorithm::ParallelCounting, Algorithm::KP}) {
    if (s == to_string(a)) return a;
  }
  throw DomainError("unknown algorithm '" + std::string(s) + "'");
}

struct AlgorithmResourceRow {
  Algorithm algorithm = Algorithm::AE;
  double qubits = 1.0;
  double depth = 1.0;
  double calls = 1.0;
};

/// Qubits, circuit depth and oracle calls of each amplitude-estimation
/// variant for an oracle on n qubits of depth d. Logarithms are base 2 and
/// every quantity is floored at 1.
inline AlgorithmResourceRow algorithm_resources(Algorithm alg, double n, double d, double epsilon, double beta = 0.0) {
  if (!(n >= 1.0) || !(d >= 1.0)) throw DomainError("oracle qubits and depth must be >= 1");
  detail::check_accuracy(epsilon);
  detail::check_beta(beta);
  const double inv = 1.0 / epsilon;
  const double lg = std::log2(inv);
  AlgorithmResourceRow row{alg, n, d, 1.0};
  switch (alg) {
    case Algorithm::AE:
      row.qubits = n + lg;
      row.depth = d * inv + (lg > 1.0 ? std::log2(lg) : 0.0);
      row.calls = inv;
      break;
    case Algorithm::QFTFreeAE:
      row.depth = d * inv;
      row.calls = inv;
      break;
    case Algorithm::ParallelCounting:
      row.depth = d * std::pow(inv, 1.0 - beta) * lg;
      row.calls = std::pow(inv, 1.0 + beta) * lg;
      break;
    case Algorithm::KP:
      row.depth = d * std::pow(inv, 1.0 - beta);
      row.calls = std::pow(inv, 1.0 + beta);
      break;
  }
  row.qubits = std::max(row.qubits, 1.0);
  row.depth = std::max(row.depth, 1.0);
  row.calls = std::max(row.calls, 1.0);
  return row;
}

// ---- tradeoff table ---------------------------------------------------------

/// One significant figure, e.g. 4309 -> 4000, 1.075e-5 -> 1e-5.
inline double round_sig1(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) return x;
  const double mag = std::pow(10.0, std::floor(std::log10(x)));
  double lead = std::round(x / mag);
  return lead * mag;
}

/// Display rule for counts and speedups: integers below 100, one significant
/// figure above.
inline double round_count(double x) { return x < 99.5 ? std::round(x) : round_sig1(x); }

inline std::string format_display(double x) {
  char buf[32];
  if (x >= 1.0 && x < 100.0 && x == std::round(x)) {
    std::snprintf(buf, sizeof buf, "%.0f", x);
  } else {
    std::snprintf(buf, sizeof buf, "%.0e", x);
  }
  return buf;
}

struct TradeoffRow {
  double epsilon = 0.0;
  double beta = 0.0;
  double classical_samples = 0.0;
  std::int64_t serial_samples = 0;
  double allowed_error = 0.0;
  double speedup = 0.0;
  double total_calls = 0.0;
  std::string note;
};

/// Cells where widely circulated versions of the table disagree with the
/// formulas; the formula value is emitted and the row is annotated.
inline std::string tradeoff_note(double epsilon, double beta) {
  const bool eps5 = std::abs(epsilon - 1e-5) <= 1e-12;
  const bool beta23 = std::abs(beta - 2.0 / 3.0) <= 1e-9;
  if (eps5 && beta23) return "known discrepancy: allowed error is often quoted as 1e-5 but (1-F)/93 = 1.1e-4";
  return "";
}

inline TradeoffRow tradeoff_row(const TradeoffPoint& pt) {
  TradeoffRow r;
  r.epsilon = pt.epsilon;
  r.beta = pt.beta;
  r.classical_samples = classical_samples(pt.epsilon);
  r.serial_samples = serial_samples(pt.epsilon, pt.beta);
  r.allowed_error = allowed_sample_error(pt.epsilon, pt.beta, pt.fidelity_target);
  r.speedup = speedup(pt.epsilon, pt.beta);
  r.total_calls = total_calls(pt.epsilon, pt.beta);
  r.note = tradeoff_note(pt.epsilon, pt.beta);
  return r;
}

}  // namespace qmc
