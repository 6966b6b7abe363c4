#pragma once

// Counter-based random streams.
//
// Every random draw in the library comes from a CounterRng keyed by a seed
// that is derived from the user seed plus a path of stream indices (schedule
// entry, bucket, sweep point, trial). Draws never depend on execution order,
// so serial and parallel evaluation produce identical results.

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace qmc {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Derives an independent stream key from a parent seed and a stream index.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return detail::mix64(detail::mix64(seed + detail::kGolden) ^ (stream * 0xd1b54a32d192ed03ULL + 1));
}

constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::initializer_list<std::uint64_t> path) noexcept {
  for (auto s : path) seed = derive_seed(seed, s);
  return seed;
}

/// Counter-mode SplitMix64: output i is mix64(key + i * golden). Satisfies
/// UniformRandomBitGenerator, so it plugs into <random> distributions.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    ++counter_;
    return detail::mix64(key_ + counter_ * detail::kGolden);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Exact binomial draw. Degenerate probabilities short-circuit so that p = 0
/// and p = 1 give exactly 0 and n hits.
inline std::int64_t sample_binomial(std::int64_t n, double p, std::uint64_t key) {
  if (n <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  CounterRng rng(key);
  std::binomial_distribution<std::int64_t> dist(n, p);
  return dist(rng);
}

}  // namespace qmc
