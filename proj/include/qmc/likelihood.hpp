#pragma once

// Maximum-likelihood fitting of theta from a measurement record, and the
// Fisher-information quantities used for confidence intervals and the
// Cramer-Rao floor.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "qmc/qae_core.hpp"
#include "qmc/schedule.hpp"

namespace qmc {

inline constexpr double kProbClamp = 1e-12;
inline constexpr std::size_t kMleGridPoints = 10000;
inline constexpr double kMleTolerance = 1e-12;
/// Local maxima of the grid scan that get refined.
inline constexpr std::size_t kMleRefinedPeaks = 8;

namespace detail {

inline double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

inline double log_likelihood(const std::vector<Measurement>& tallies, double theta, NoiseModel noise) {
  double ll = 0.0;
  for (const auto& t : tallies) {
    const double p = clamp_prob(p_one(Theta{theta}, t.depth, noise));
    ll += static_cast<double>(t.hits) * std::log(p) + static_cast<double>(t.shots - t.hits) * std::log1p(-p);
  }
  return ll;
}

// Golden-section search for the maximum of f on [lo, hi].
template <typename F>
double golden_max(F&& f, double lo, double hi, double tol) {
  constexpr double kInvPhi = 0.6180339887498949;
  double c = hi - kInvPhi * (hi - lo);
  double d = lo + kInvPhi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  while (hi - lo > tol) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - kInvPhi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + kInvPhi * (hi - lo);
      fd = f(d);
    }
    if (hi - lo <= std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(hi))) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Log-likelihood of theta given the record.
inline double log_likelihood(const MeasurementRecord& record, Theta theta, NoiseModel noise = {}) {
  return detail::log_likelihood(record.by_depth(), theta.radians, noise);
}

/// Maximum-likelihood theta over [0, pi/2].
///
/// A dense grid scan locates candidate peaks; the best few local maxima are
/// refined with golden-section search to width 1e-12 and the overall best is
/// returned. Records holding only depth-0 entries have the closed-form
/// Bernoulli solution, which is returned directly.
inline Theta mle_fit(const MeasurementRecord& record, NoiseModel noise = {}) {
  record.validate();
  noise.validate();
  const auto tallies = record.by_depth();

  if (tallies.size() == 1 && tallies.front().depth == 0) {
    const auto& t = tallies.front();
    const double lambda = noise.survival(1);
    const double freq = static_cast<double>(t.hits) / static_cast<double>(t.shots);
    if (lambda <= 0.0) return Theta{std::asin(std::sqrt(0.5))};
    const double a = std::clamp((freq - 0.5 * (1.0 - lambda)) / lambda, 0.0, 1.0);
    return Theta{std::asin(std::sqrt(a))};
  }

  auto ll = [&](double th) { return detail::log_likelihood(tallies, th, noise); };

  constexpr std::size_t n = kMleGridPoints;
  const double step = kHalfPi / static_cast<double>(n - 1);
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = ll(step * static_cast<double>(i));

  std::vector<std::size_t> peaks;
  for (std::size_t i = 0; i < n; ++i) {
    const bool left_ok = i == 0 || values[i] >= values[i - 1];
    const bool right_ok = i + 1 == n || values[i] >= values[i + 1];
    if (left_ok && right_ok) peaks.push_back(i);
  }
  const std::size_t keep = std::min(peaks.size(), kMleRefinedPeaks);
  std::partial_sort(peaks.begin(), peaks.begin() + static_cast<std::ptrdiff_t>(keep), peaks.end(),
                    [&](std::size_t x, std::size_t y) { return values[x] > values[y] || (values[x] == values[y] && x < y); });

  double best_theta = step * static_cast<double>(peaks.front());
  double best_value = values[peaks.front()];
  for (std::size_t k = 0; k < keep; ++k) {
    const std::size_t i = peaks[k];
    const double lo = i == 0 ? 0.0 : step * static_cast<double>(i - 1);
    const double hi = i + 1 == n ? kHalfPi : step * static_cast<double>(i + 1);
    double th = detail::golden_max(ll, lo, hi, kMleTolerance);
    double v = ll(th);
    // Peaks on the boundary: the interior refinement can only approach it.
    for (double edge : {lo, hi}) {
      if ((edge == 0.0 || edge == kHalfPi) && ll(edge) >= v) {
        th = edge;
        v = ll(edge);
      }
    }
    if (v > best_value) {
      best_value = v;
      best_theta = th;
    }
  }
  return Theta{std::clamp(best_theta, 0.0, kHalfPi)};
}

/// Expected Fisher information about theta: sum_k n_k p_k'^2 / (p_k (1 - p_k)).
inline double expected_information(const std::vector<Measurement>& tallies, Theta theta, NoiseModel noise = {}) {
  double info = 0.0;
  for (const auto& t : tallies) {
    const double p = detail::clamp_prob(p_one(theta, t.depth, noise));
    const double dp = dp_one_dtheta(theta, t.depth, noise);
    info += static_cast<double>(t.shots) * dp * dp / (p * (1.0 - p));
  }
  return info;
}

/// Observed Fisher information about theta: minus the second derivative of
/// the log-likelihood.
inline double observed_information(const MeasurementRecord& record, Theta theta, NoiseModel noise = {}) {
  double info = 0.0;
  for (const auto& t : record.by_depth()) {
    const double k = static_cast<double>(2 * t.depth + 1);
    const double lambda = noise.survival(2 * t.depth + 1);
    const double p = detail::clamp_prob(p_one(theta, t.depth, noise));
    const double dp = lambda * k * std::sin(2.0 * k * theta.radians);
    const double d2p = 2.0 * lambda * k * k * std::cos(2.0 * k * theta.radians);
    const double h = static_cast<double>(t.hits);
    const double miss = static_cast<double>(t.shots - t.hits);
    const double score = h / p - miss / (1.0 - p);
    const double curvature = h / (p * p) + miss / ((1.0 - p) * (1.0 - p));
    info -= score * d2p - curvature * dp * dp;
  }
  return info;
}

/// Cramer-Rao lower bound on the standard deviation of an unbiased estimate
/// of a: 1 / sqrt(sum_k n_k (dp_k/da)^2 / (p_k (1 - p_k))). Returns +inf when
/// the schedule carries no information, and 0 when some entry is noiseless
/// and deterministic (p_k in {0, 1} with nonzero slope).
inline double fisher_bound(const Schedule& schedule, Theta theta, NoiseModel noise = {}) {
  schedule.validate();
  noise.validate();
  double info = 0.0;
  for (const auto& e : schedule.entries()) {
    const double p = p_one(theta, e.depth, noise);
    const double dp = dp_one_da(theta, e.depth, noise);
    if (dp == 0.0) continue;
    const double var = p * (1.0 - p);
    if (var <= 0.0) return 0.0;
    info += static_cast<double>(e.shots) * dp * dp / var;
  }
  if (!(info > 0.0)) return std::numeric_limits<double>::infinity();
  return 1.0 / std::sqrt(info);
}

}  // namespace qmc
