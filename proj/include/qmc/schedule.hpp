#pragma once

// Depth schedules, measurement records, and schedule execution.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qmc/errors.hpp"
#include "qmc/oracle.hpp"
#include "qmc/parallel.hpp"
#include "qmc/qae_core.hpp"
#include "qmc/random.hpp"

namespace qmc {

inline constexpr std::int64_t kDefaultShotsPerRound = 100;

class Schedule {
 public:
  Schedule() = default;
  explicit Schedule(std::vector<ScheduleEntry> entries) : entries_(std::move(entries)) { validate(); }

  void push_back(ScheduleEntry e) {
    check(e);
    entries_.push_back(e);
  }

  const std::vector<ScheduleEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  std::int64_t total_calls() const noexcept {
    std::int64_t total = 0;
    for (const auto& e : entries_) total += e.total_calls();
    return total;
  }

  std::int64_t max_depth() const noexcept {
    std::int64_t d = 0;
    for (const auto& e : entries_) d = std::max(d, e.depth);
    return d;
  }

  /// Oracle calls in the deepest circuit.
  std::int64_t max_serial_calls() const noexcept { return 2 * max_depth() + 1; }

  void validate() const {
    if (entries_.empty()) throw DomainError("schedule must contain at least one entry");
    for (const auto& e : entries_) check(e);
  }

  friend bool operator==(const Schedule&, const Schedule&) = default;

 private:
  static void check(const ScheduleEntry& e) {
    if (e.depth < 0) throw DomainError("schedule depth must be non-negative");
    if (e.shots < 1) throw DomainError("schedule shots must be at least 1");
  }

  std::vector<ScheduleEntry> entries_;
};

/// Depths 0, 1, 2, 4, ..., 2^(K-1), each with `shots_per_round` shots.
inline Schedule build_exp_schedule(int max_depth_exponent, std::int64_t shots_per_round = kDefaultShotsPerRound) {
  if (max_depth_exponent < 0) throw DomainError("max depth exponent must be non-negative");
  if (max_depth_exponent > 40) throw SizeError("max depth exponent too large");
  if (shots_per_round < 1) throw DomainError("shots per round must be at least 1");
  std::vector<ScheduleEntry> entries{{0, shots_per_round}};
  for (int j = 0; j < max_depth_exponent; ++j) entries.push_back({std::int64_t{1} << j, shots_per_round});
  return Schedule(std::move(entries));
}

/// Depths 0, 1, 2, 4, ... below `max_depth`, then `max_depth` itself.
inline std::vector<std::int64_t> ramp_depths(std::int64_t max_depth) {
  std::vector<std::int64_t> depths{0};
  for (std::int64_t d = 1; d < max_depth; d *= 2) depths.push_back(d);
  if (max_depth > 0) depths.push_back(max_depth);
  return depths;
}

inline Schedule build_ramp_schedule(std::int64_t max_depth, std::int64_t shots_per_round = kDefaultShotsPerRound) {
  if (max_depth < 0) throw DomainError("max depth must be non-negative");
  if (shots_per_round < 1) throw DomainError("shots per round must be at least 1");
  std::vector<ScheduleEntry> entries;
  for (auto d : ramp_depths(max_depth)) entries.push_back({d, shots_per_round});
  return Schedule(std::move(entries));
}

namespace detail {

inline void check_interpolation(double epsilon, double beta) {
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw DomainError("epsilon must lie in (0, 0.5)");
  if (!(beta >= 0.0 && beta <= 1.0)) throw DomainError("beta must lie in [0, 1]");
}

// ceil() that ignores representation error in values meant to be integral,
// e.g. pow(1000, 5/3) evaluating to 100000.00000000001.
inline std::int64_t robust_ceil(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return static_cast<std::int64_t>(r);
  return static_cast<std::int64_t>(std::ceil(x));
}

}  // namespace detail

/// Grover-depth cap for accuracy epsilon at interpolation beta: (1/eps)^(1-beta)
/// rounded to the nearest integer, at least 1.
inline std::int64_t kp_depth_cap(double epsilon, double beta) {
  detail::check_interpolation(epsilon, beta);
  const double x = std::pow(1.0 / epsilon, 1.0 - beta);
  return std::max<std::int64_t>(1, std::llround(x));
}

/// Oracle-call budget scale * (1/eps)^(1+beta), rounded up.
inline std::int64_t kp_call_target(double epsilon, double beta, double scale = 1.0) {
  detail::check_interpolation(epsilon, beta);
  return detail::robust_ceil(scale * std::pow(1.0 / epsilon, 1.0 + beta));
}

struct KpScheduleOptions {
  std::int64_t shots_per_round = kDefaultShotsPerRound;
  /// Smallest base shot count used when the ramp has to be thinned to fit
  /// the call budget.
  std::int64_t min_shots = 1;
  /// Extra base-shot multiples per level below the cap: ramp level j of L
  /// gets s * (1 + ramp_taper * (L - j)) shots. Shallow rounds are cheap and
  /// decide which likelihood peak the fit lands on.
  std::int64_t ramp_taper = 1;
  /// Constant factor on the call budget, T = ceil(budget_scale * (1/eps)^(1+beta)).
  double budget_scale = 1.0;
};

/// Interpolating schedule: an exponential ramp up to the depth cap D, then
/// repeated rounds of s shots at depth D until the call budget T is met.
///
/// The base shot count s is shots_per_round unless the ramp would consume
/// more than half the budget, in which case it is thinned, but not below
/// min_shots. Beta = 1 degenerates to depth-0 rounds only.
inline Schedule build_kp_schedule(double epsilon, double beta, const KpScheduleOptions& opt = {}) {
  detail::check_interpolation(epsilon, beta);
  if (opt.shots_per_round < 1 || opt.min_shots < 1) throw DomainError("shots per round must be at least 1");
  if (opt.ramp_taper < 0) throw DomainError("ramp taper must be non-negative");
  if (!(opt.budget_scale >= 1.0) || !std::isfinite(opt.budget_scale)) throw DomainError("budget scale must be >= 1");
  const std::int64_t cap = beta >= 1.0 ? 0 : kp_depth_cap(epsilon, beta);
  const std::int64_t target = kp_call_target(epsilon, beta, opt.budget_scale);
  const auto depths = ramp_depths(cap);
  const auto levels = static_cast<std::int64_t>(depths.size());
  auto multiplier = [&](std::int64_t j) { return 1 + opt.ramp_taper * (levels - 1 - j); };

  std::int64_t ramp_calls = 0;
  for (std::int64_t j = 0; j < levels; ++j) ramp_calls += multiplier(j) * (2 * depths[j] + 1);
  std::int64_t shots = opt.shots_per_round;
  if (2 * ramp_calls * shots > target) {
    shots = std::clamp(target / (2 * ramp_calls), std::min(opt.min_shots, opt.shots_per_round), opt.shots_per_round);
  }

  std::vector<ScheduleEntry> entries;
  std::int64_t total = 0;
  for (std::int64_t j = 0; j < levels; ++j) {
    entries.push_back({depths[j], shots * multiplier(j)});
    total += entries.back().total_calls();
  }
  while (total < target) {
    entries.push_back({cap, shots});
    total += shots * (2 * cap + 1);
  }
  return Schedule(std::move(entries));
}

inline Schedule build_kp_schedule(double epsilon, double beta, std::int64_t shots_per_round) {
  return build_kp_schedule(epsilon, beta, KpScheduleOptions{.shots_per_round = shots_per_round});
}

struct Measurement {
  std::int64_t depth = 0;
  std::int64_t shots = 1;
  std::int64_t hits = 0;

  friend bool operator==(const Measurement&, const Measurement&) = default;
};

/// Hit counts per schedule entry, in schedule order.
struct MeasurementRecord {
  std::vector<Measurement> entries;

  void validate() const {
    if (entries.empty()) throw DomainError("measurement record is empty");
    for (const auto& m : entries) {
      if (m.depth < 0 || m.shots < 1 || m.hits < 0 || m.hits > m.shots) {
        throw DomainError("measurement record entry violates 0 <= hits <= shots");
      }
    }
  }

  std::int64_t total_calls() const noexcept {
    std::int64_t total = 0;
    for (const auto& m : entries) total += m.shots * (2 * m.depth + 1);
    return total;
  }

  std::int64_t max_depth() const noexcept {
    std::int64_t d = 0;
    for (const auto& m : entries) d = std::max(d, m.depth);
    return d;
  }

  /// Entries merged by depth; (shots, hits) per depth are sufficient statistics.
  std::vector<Measurement> by_depth() const {
    std::map<std::int64_t, std::pair<std::int64_t, std::int64_t>> merged;
    for (const auto& m : entries) {
      auto& [shots, hits] = merged[m.depth];
      shots += m.shots;
      hits += m.hits;
    }
    std::vector<Measurement> out;
    out.reserve(merged.size());
    for (const auto& [depth, tally] : merged) out.push_back({depth, tally.first, tally.second});
    return out;
  }

  friend bool operator==(const MeasurementRecord&, const MeasurementRecord&) = default;
};

inline void write_record_csv(std::ostream& os, const MeasurementRecord& record) {
  os << "depth,shots,hits\n";
  for (const auto& m : record.entries) os << m.depth << ',' << m.shots << ',' << m.hits << '\n';
}

inline MeasurementRecord read_record_csv(std::istream& is) {
  MeasurementRecord record;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "depth,shots,hits") throw ConfigError("record CSV must start with header depth,shots,hits");
      header_seen = true;
      continue;
    }
    std::istringstream row(line);
    Measurement m;
    char c1 = 0, c2 = 0;
    if (!(row >> m.depth >> c1 >> m.shots >> c2 >> m.hits) || c1 != ',' || c2 != ',' || !(row >> std::ws).eof()) {
      throw ConfigError("malformed record CSV at line " + std::to_string(line_no));
    }
    record.entries.push_back(m);
  }
  if (!header_seen) throw ConfigError("record CSV is empty");
  record.validate();
  return record;
}

/// Samples every schedule entry. Entry i draws from the stream
/// derive_seed(rng_seed, i), so results do not depend on `threads`.
inline MeasurementRecord run_schedule(const OracleSpec& oracle, const Schedule& schedule, NoiseModel noise,
                                      std::uint64_t rng_seed, unsigned threads = 1) {
  schedule.validate();
  noise.validate();
  const Theta theta = Theta::from_amplitude(oracle.amplitude());
  const auto& entries = schedule.entries();
  MeasurementRecord record;
  record.entries.resize(entries.size());
  parallel_for(entries.size(), threads, [&](std::size_t i) {
    const auto& e = entries[i];
    record.entries[i] = {e.depth, e.shots, sample_shots(theta, e.depth, e.shots, noise, derive_seed(rng_seed, i))};
  });
  return record;
}

}  // namespace qmc
