// Copyright gridres contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "gridres/error.hpp"

namespace gridres {

/// One breakpoint of a piecewise-linear intensity.
struct Knot {
  double time = 0.0;       ///< hours
  double intensity = 0.0;  ///< events per hour
};

/// Nonnegative intensity (events/hour) on [0, horizon].
///
/// Linear between knots, held constant before the first and after the last
/// knot. The process the intensity drives lives on [0, horizon]; integrals
/// never extend past the horizon.
class RateFunction {
 public:
  RateFunction(std::vector<Knot> knots, double horizon)
      : knots_(std::move(knots)), horizon_(horizon) {
    detail::require(!knots_.empty(), "rate function needs at least one knot");
    detail::require(std::isfinite(horizon_) && horizon_ > 0.0,
                    "rate function horizon must be positive");
    for (std::size_t i = 0; i < knots_.size(); ++i) {
      const Knot& k = knots_[i];
      detail::require(std::isfinite(k.time) && k.time >= 0.0, "knot times must be >= 0");
      detail::require(std::isfinite(k.intensity) && k.intensity >= 0.0,
                      "intensities must be finite and >= 0");
      if (i > 0) {
        detail::require(k.time > knots_[i - 1].time, "knot times must be strictly increasing");
      }
    }
    detail::require(horizon_ >= knots_.back().time, "horizon must not precede the last knot");
  }

  static RateFunction constant(double intensity, double horizon) {
    return RateFunction({{0.0, intensity}}, horizon);
  }

  /// Knots at `times` with intensities `values`; both spans must match in length.
  static RateFunction tabulated(std::span<const double> times, std::span<const double> values,
                                double horizon) {
    detail::require(times.size() == values.size(), "times and values differ in length");
    std::vector<Knot> knots;
    knots.reserve(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) knots.push_back({times[i], values[i]});
    return RateFunction(std::move(knots), horizon);
  }

  [[nodiscard]] double horizon() const noexcept { return horizon_; }
  [[nodiscard]] const std::vector<Knot>& knots() const noexcept { return knots_; }

  [[nodiscard]] double operator()(double t) const noexcept {
    if (t <= knots_.front().time) return knots_.front().intensity;
    if (t >= knots_.back().time) return knots_.back().intensity;
    auto hi = std::upper_bound(knots_.begin(), knots_.end(), t,
                               [](double x, const Knot& k) { return x < k.time; });
    auto lo = hi - 1;
    const double w = (t - lo->time) / (hi->time - lo->time);
    return lo->intensity + w * (hi->intensity - lo->intensity);
  }

  /// Largest intensity on [0, horizon]; attained at a knot.
  [[nodiscard]] double max() const noexcept {
    double m = 0.0;
    for (const Knot& k : knots_) m = std::max(m, k.intensity);
    return m;
  }

  /// Exact integral over [a, b] clipped to [0, horizon].
  [[nodiscard]] double integral(double a, double b) const noexcept {
    a = std::clamp(a, 0.0, horizon_);
    b = std::clamp(b, 0.0, horizon_);
    if (b <= a) return 0.0;
    double total = 0.0;
    double x = a;
    double fx = (*this)(a);
    for (const Knot& k : knots_) {
      if (k.time <= a) continue;
      if (k.time >= b) break;
      total += 0.5 * (fx + k.intensity) * (k.time - x);
      x = k.time;
      fx = k.intensity;
    }
    total += 0.5 * (fx + (*this)(b)) * (b - x);
    return total;
  }

  /// Cumulative intensity from 0 to t.
  [[nodiscard]] double cumulative(double t) const noexcept { return integral(0.0, t); }

  [[nodiscard]] double total() const noexcept { return integral(0.0, horizon_); }

  /// Knot times strictly inside (a, b).
  [[nodiscard]] std::vector<double> breakpoints(double a, double b) const {
    std::vector<double> out;
    for (const Knot& k : knots_)
      if (k.time > a && k.time < b) out.push_back(k.time);
    return out;
  }

 private:
  std::vector<Knot> knots_;
  double horizon_;
};

}  // namespace gridres
