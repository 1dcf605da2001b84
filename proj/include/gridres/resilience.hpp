// Copyright gridres contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gridres/duration_model.hpp"
#include "gridres/error.hpp"
#include "gridres/process_core.hpp"
#include "gridres/rate_function.hpp"

namespace gridres {

inline constexpr double kDefaultGridStep = 0.25;    // hours
inline constexpr std::size_t kDefaultSmoothing = 5;  // grid points

namespace detail {

inline std::size_t bucket_of(std::span<const double> edges, double t) {
  auto it = std::upper_bound(edges.begin(), edges.end(), t);
  const std::size_t m = edges.size() - 1;
  if (it == edges.begin()) return 0;
  return std::min(static_cast<std::size_t>(it - edges.begin()) - 1, m - 1);
}

}  // namespace detail

/// Probability that a failure falls in each interval, from the failure
/// intensity. Mass before psi_0 goes to the first interval, after psi_m to
/// the last.
inline std::vector<double> interval_weights(const RateFunction& failure_rate,
                                            std::span<const double> boundaries) {
  detail::require(boundaries.size() >= 2, "need at least two interval edges");
  const FailureTimeDensity f(failure_rate);
  const std::size_t m = boundaries.size() - 1;
  std::vector<double> w(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double lo = i == 0 ? 0.0 : boundaries[i];
    const double hi = i + 1 == m ? failure_rate.horizon() : boundaries[i + 1];
    w[i] = f.mass(lo, hi);
  }
  double total = 0.0;
  for (double x : w) total += x;
  for (double& x : w) x /= total;
  return w;
}

/// Empirical fraction of failures per interval.
inline std::vector<double> interval_weights(std::span<const double> failure_times,
                                            std::span<const double> boundaries) {
  detail::require(boundaries.size() >= 2, "need at least two interval edges");
  if (failure_times.empty()) throw ValidationError("empty dataset: no failures to weight");
  std::vector<double> w(boundaries.size() - 1, 0.0);
  for (double t : failure_times) w[detail::bucket_of(boundaries, t)] += 1.0;
  for (double& x : w) x /= static_cast<double>(failure_times.size());
  return w;
}

enum class CurveShape { concave, convex, indeterminate };

inline const char* to_string(CurveShape s) {
  switch (s) {
    case CurveShape::concave: return "concave";
    case CurveShape::convex: return "convex";
    case CurveShape::indeterminate: return "indeterminate";
  }
  return "?";
}

struct ThresholdPick {
  double d0 = 0.0;
  CurveShape shape = CurveShape::indeterminate;
  double concave_candidate = 0.0;  ///< argmin of s''
  double convex_candidate = 0.0;   ///< argmax of s''
  std::vector<double> smoothed;
  std::vector<double> second_derivative;  ///< end points copy their neighbours
};

namespace detail {

/// Centred moving average; the half-width shrinks near the ends so linear
/// stretches pass through unchanged.
inline std::vector<double> smooth(std::span<const double> v, std::size_t window) {
  std::vector<double> out(v.begin(), v.end());
  if (window <= 1) return out;
  const std::size_t hw = window / 2;
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t h = std::min({hw, i, n - 1 - i});
    double s = 0.0;
    for (std::size_t j = i - h; j <= i + h; ++j) s += v[j];
    out[i] = s / static_cast<double>(2 * h + 1);
  }
  return out;
}

/// Index at the centre of the run of (near-)extreme values holding the first
/// extremum among interior points. `sign` = -1 for argmin, +1 for argmax.
inline std::size_t extreme_index(std::span<const double> d2, int sign) {
  const std::size_t n = d2.size();
  std::size_t best = 1;
  for (std::size_t i = 2; i + 1 < n; ++i)
    if (sign * d2[i] > sign * d2[best]) best = i;
  const double tol = 1e-6 * std::abs(d2[best]);
  std::size_t lo = best, hi = best;
  while (lo > 1 && std::abs(d2[lo - 1] - d2[best]) <= tol) --lo;
  while (hi + 2 < n && std::abs(d2[hi + 1] - d2[best]) <= tol) ++hi;
  return (lo + hi) / 2;
}

}  // namespace detail

/// Threshold d0 at the strongest curvature of s(x).
///
/// Second derivative by central differences on the (optionally smoothed)
/// curve. The shape comes from the sign of the integrated second derivative;
/// when positive and negative mass are within 10% of each other the shape is
/// indeterminate and both candidates are reported. Boundary points never win.
inline ThresholdPick pick_threshold(std::span<const double> grid, std::span<const double> values,
                                    std::size_t smoothing = kDefaultSmoothing) {
  detail::require(grid.size() == values.size(), "grid and values differ in length");
  detail::require(grid.size() >= 5, "threshold picking needs at least 5 grid points");
  for (std::size_t i = 1; i < grid.size(); ++i)
    detail::require(grid[i] > grid[i - 1], "grid must be strictly increasing");
  ThresholdPick out;
  out.smoothed = detail::smooth(values, smoothing);
  const auto& s = out.smoothed;
  const std::size_t n = grid.size();
  out.second_derivative.assign(n, 0.0);
  double pos = 0.0, neg = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double hl = grid[i] - grid[i - 1];
    const double hr = grid[i + 1] - grid[i];
    const double d2 = 2.0 * ((s[i + 1] - s[i]) / hr - (s[i] - s[i - 1]) / hl) / (hl + hr);
    out.second_derivative[i] = d2;
    const double cell = 0.5 * (hl + hr);
    (d2 > 0.0 ? pos : neg) += std::abs(d2) * cell;
  }
  out.second_derivative.front() = out.second_derivative[1];
  out.second_derivative.back() = out.second_derivative[n - 2];

  const auto& d2 = out.second_derivative;
  const std::size_t imin = detail::extreme_index(d2, -1);
  const std::size_t imax = detail::extreme_index(d2, +1);
  out.concave_candidate = grid[imin];
  out.convex_candidate = grid[imax];
  const double total = pos + neg;
  if (total <= 0.0 || std::abs(pos - neg) <= 0.1 * total) {
    out.shape = CurveShape::indeterminate;
    out.d0 = std::abs(d2[imin]) >= std::abs(d2[imax]) ? out.concave_candidate
                                                       : out.convex_candidate;
  } else if (neg > pos) {
    out.shape = CurveShape::concave;
    out.d0 = out.concave_candidate;
  } else {
    out.shape = CurveShape::convex;
    out.d0 = out.convex_candidate;
  }
  return out;
}

/// s(x) = sum_i w_i G_i(x) on a grid, with the automatically picked threshold.
struct ResilienceCurve {
  std::vector<double> grid;
  std::vector<double> values;
  std::vector<double> weights;
  std::optional<ThresholdPick> pick;  ///< absent when the grid is too short
  double d0 = 0.0;
  double s_at_d0 = 0.0;
  bool d0_overridden = false;
};

/// Uniform grid 0, step, ..., up to and including `max`.
inline std::vector<double> uniform_grid(double step, double max) {
  detail::require(step > 0.0 && max > 0.0, "grid step and extent must be > 0");
  std::vector<double> g;
  const auto n = static_cast<std::size_t>(std::ceil(max / step - 1e-9));
  for (std::size_t i = 0; i <= n; ++i) g.push_back(static_cast<double>(i) * step);
  return g;
}

inline double resilience_at(const ResilienceCurve& curve, double d0) {
  const auto& x = curve.grid;
  detail::require(!x.empty(), "empty resilience curve");
  if (!(d0 >= x.front() && d0 <= x.back()))
    throw ValidationError("d0 outside the resilience grid [" + std::to_string(x.front()) + ", " +
                          std::to_string(x.back()) + "]");
  auto it = std::lower_bound(x.begin(), x.end(), d0);
  const auto i = static_cast<std::size_t>(it - x.begin());
  if (x[i] == d0) return curve.values[i];
  const double w = (d0 - x[i - 1]) / (x[i] - x[i - 1]);
  return curve.values[i - 1] + w * (curve.values[i] - curve.values[i - 1]);
}

inline ResilienceCurve resilience_curve(std::span<const double> weights, const DurationModel& model,
                                        std::span<const double> grid,
                                        std::size_t smoothing = kDefaultSmoothing,
                                        std::optional<double> d0_override = std::nullopt) {
  detail::require(weights.size() == model.interval_count(), "one weight per interval required");
  double total = 0.0;
  for (double w : weights) {
    detail::require(w >= 0.0, "weights must be >= 0");
    total += w;
  }
  detail::require(std::abs(total - 1.0) <= 1e-9, "weights must sum to 1");
  detail::require(!grid.empty() && grid.front() == 0.0, "grid must start at 0");
  for (std::size_t i = 1; i < grid.size(); ++i)
    detail::require(grid[i] > grid[i - 1], "grid must be ascending");

  ResilienceCurve c;
  c.grid.assign(grid.begin(), grid.end());
  c.weights.assign(weights.begin(), weights.end());
  c.values.reserve(grid.size());
  double prev = 0.0;
  for (double x : grid) {
    double s = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * model.mixtures()[i].cdf(x);
    s = std::clamp(std::max(s, prev), 0.0, 1.0);  // rounding can jitter by an ulp
    c.values.push_back(s);
    prev = s;
  }
  if (grid.size() >= 5) {
    c.pick = pick_threshold(c.grid, c.values, smoothing);
    c.d0 = c.pick->d0;
  }
  if (d0_override) {
    c.d0 = *d0_override;
    c.d0_overridden = true;
  }
  if (c.pick || d0_override) c.s_at_d0 = resilience_at(c, c.d0);
  return c;
}

/// Per interval (P{D < d0 | psi_i}, P{D > d0 | psi_i}).
inline std::vector<std::pair<double, double>> infant_aging_split(const DurationModel& model,
                                                                 double d0) {
  detail::require(d0 > 0.0, "d0 must be > 0");
  std::vector<std::pair<double, double>> out;
  for (const auto& g : model.mixtures()) {
    const double p = g.cdf(d0);
    out.emplace_back(p, 1.0 - p);
  }
  return out;
}

}  // namespace gridres
