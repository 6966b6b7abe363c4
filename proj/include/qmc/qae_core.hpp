#pragma once

// Exact simulation of amplitude estimation in the two-dimensional subspace
// spanned by the good and bad states. An oracle with amplitude a = sin^2(theta)
// enters only through theta; k Grover iterates rotate by 2*theta each, so a
// depth-m circuit (2m+1 oracle calls) measures "good" with probability
// sin^2((2m+1) theta).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "qmc/errors.hpp"
#include "qmc/random.hpp"

namespace qmc {

inline constexpr double kHalfPi = std::numbers::pi / 2.0;

/// Rotation angle in [0, pi/2] with sin^2(theta) = amplitude.
struct Theta {
  double radians = 0.0;

  static Theta from_amplitude(double a) {
    if (!(a >= 0.0 && a <= 1.0)) throw DomainError("amplitude must lie in [0, 1]");
    return Theta{std::asin(std::sqrt(a))};
  }

  double amplitude() const noexcept {
    const double s = std::sin(radians);
    return std::clamp(s * s, 0.0, 1.0);
  }
};

/// Depolarizing channel applied once per oracle call.
struct NoiseModel {
  double depol_rate = 0.0;

  static NoiseModel noiseless() noexcept { return {}; }

  void validate() const {
    if (!(depol_rate >= 0.0 && depol_rate <= 1.0)) throw DomainError("depolarizing rate must lie in [0, 1]");
  }

  /// Probability that no depolarizing event occurred over `calls` oracle calls.
  double survival(std::int64_t calls) const noexcept {
    if (depol_rate <= 0.0) return 1.0;
    if (depol_rate >= 1.0) return calls == 0 ? 1.0 : 0.0;
    return std::exp(static_cast<double>(calls) * std::log1p(-depol_rate));
  }
};

/// One measured circuit configuration: `shots` repetitions of depth `depth`.
struct ScheduleEntry {
  std::int64_t depth = 0;
  std::int64_t shots = 1;

  constexpr std::int64_t calls_per_shot() const noexcept { return 2 * depth + 1; }
  constexpr std::int64_t total_calls() const noexcept { return shots * calls_per_shot(); }

  friend constexpr bool operator==(const ScheduleEntry&, const ScheduleEntry&) = default;
};

/// Probability of measuring "good" after `depth` Grover iterates:
/// lambda * sin^2((2m+1) theta) + (1 - lambda) / 2 with lambda = (1-q)^(2m+1).
inline double p_one(Theta theta, std::int64_t depth, NoiseModel noise = {}) {
  if (depth < 0) throw DomainError("depth must be non-negative");
  const std::int64_t k = 2 * depth + 1;
  const double s = std::sin(static_cast<double>(k) * theta.radians);
  const double lambda = noise.survival(k);
  return std::clamp(lambda * s * s + (1.0 - lambda) * 0.5, 0.0, 1.0);
}

/// d p_one / d theta.
inline double dp_one_dtheta(Theta theta, std::int64_t depth, NoiseModel noise = {}) {
  const double k = static_cast<double>(2 * depth + 1);
  return noise.survival(2 * depth + 1) * k * std::sin(2.0 * k * theta.radians);
}

/// d p_one / d a, using da/dtheta = sin(2 theta). At the boundaries the ratio
/// sin(2k theta)/sin(2 theta) is replaced by its limit.
inline double dp_one_da(Theta theta, std::int64_t depth, NoiseModel noise = {}) {
  const double k = static_cast<double>(2 * depth + 1);
  const double lambda = noise.survival(2 * depth + 1);
  const double denom = std::sin(2.0 * theta.radians);
  if (std::abs(denom) < 1e-9) {
    // theta -> 0: ratio -> k.  theta -> pi/2: ratio -> k * cos(k pi) / cos(pi) = k for odd k.
    return lambda * k * k;
  }
  // d/da sin^2(k theta) = k sin(2k theta) / sin(2 theta)
  return lambda * k * std::sin(2.0 * k * theta.radians) / denom;
}

/// Binomial hit count for `shots` independent depth-`depth` circuits.
inline std::int64_t sample_shots(Theta theta, std::int64_t depth, std::int64_t shots, NoiseModel noise,
                                 std::uint64_t rng_seed) {
  if (shots < 1) throw DomainError("shots must be at least 1");
  return sample_binomial(shots, p_one(theta, depth, noise), rng_seed);
}

inline constexpr int kMaxQpeBits = 20;

/// Outcome distribution of textbook phase estimation on the Grover iterate.
///
/// The initial state is an equal superposition of the two eigenvectors with
/// eigenphase fractions +/- theta/pi. For phase fraction phi the register
/// outcome y has probability |(1/M) sum_x exp(2 pi i x (phi - y/M))|^2, which
/// is the Fejer kernel sin^2(M pi d) / (M^2 sin^2(pi d)) with d = phi - y/M.
inline std::vector<double> qpe_distribution(Theta theta, int m_bits) {
  if (m_bits < 1 || m_bits > kMaxQpeBits) {
    throw SizeError("m_bits must lie in [1, " + std::to_string(kMaxQpeBits) + "], got " + std::to_string(m_bits));
  }
  const std::size_t size = std::size_t{1} << m_bits;
  const double M = static_cast<double>(size);
  const double phi = theta.radians / std::numbers::pi;

  auto kernel = [M](double delta) {
    // Reduce to (-1/2, 1/2]; the kernel has period 1 in delta.
    delta -= std::round(delta);
    const double den = std::sin(std::numbers::pi * delta);
    if (std::abs(den) < 1e-15) return 1.0;
    const double num = std::sin(M * std::numbers::pi * delta);
    return (num * num) / (M * M * den * den);
  };

  std::vector<double> probs(size);
  for (std::size_t y = 0; y < size; ++y) {
    const double frac = static_cast<double>(y) / M;
    probs[y] = 0.5 * (kernel(phi - frac) + kernel(-phi - frac));
  }
  return probs;
}

/// Amplitude decoded from register outcome y: sin^2(pi y / 2^m_bits).
inline double qpe_estimate_map(std::uint64_t y, int m_bits) {
  if (m_bits < 1 || m_bits > kMaxQpeBits) throw SizeError("m_bits out of range");
  const std::uint64_t size = std::uint64_t{1} << m_bits;
  if (y >= size) throw DomainError("register outcome out of range");
  const double s = std::sin(std::numbers::pi * static_cast<double>(y) / static_cast<double>(size));
  return std::clamp(s * s, 0.0, 1.0);
}

}  // namespace qmc
