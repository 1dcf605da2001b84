// Copyright gridres contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "gridres/error.hpp"

namespace gridres {

/// Weibull distribution with a mixing weight.
struct WeibullComponent {
  double weight = 1.0;  ///< mixing probability
  double scale = 1.0;   ///< hours
  double shape = 1.0;   ///< < 1 infant-like, > 1 aging-like

  [[nodiscard]] double pdf(double d) const noexcept {
    if (d < 0.0) return 0.0;
    if (d == 0.0) {
      if (shape < 1.0) return std::numeric_limits<double>::infinity();
      return shape == 1.0 ? 1.0 / scale : 0.0;
    }
    return std::exp(log_pdf(d));
  }

  [[nodiscard]] double log_pdf(double d) const noexcept {
    if (d <= 0.0) return shape < 1.0 ? std::numeric_limits<double>::infinity()
                                     : shape == 1.0 ? -std::log(scale)
                                                    : -std::numeric_limits<double>::infinity();
    const double lz = std::log(d / scale);
    return std::log(shape / scale) + (shape - 1.0) * lz - std::exp(shape * lz);
  }

  [[nodiscard]] double cdf(double d) const noexcept {
    if (d <= 0.0) return 0.0;
    return -std::expm1(-std::pow(d / scale, shape));
  }

  [[nodiscard]] double survival(double d) const noexcept {
    if (d <= 0.0) return 1.0;
    return std::exp(-std::pow(d / scale, shape));
  }

  /// Inverse cdf, u in [0, 1).
  [[nodiscard]] double quantile(double u) const noexcept {
    return scale * std::pow(-std::log1p(-u), 1.0 / shape);
  }

  /// int_0^d x pdf(x) dx.
  [[nodiscard]] double partial_mean(double d) const {
    if (d <= 0.0) return 0.0;
    const double a = 1.0 + 1.0 / shape;
    const double z = std::pow(d / scale, shape);
    if (!std::isfinite(z)) return scale * std::tgamma(a);
    return scale * std::tgamma(a) * boost::math::gamma_p(a, z);
  }
};

/// Weighted sum of Weibull densities for failure durations.
class WeibullMixture {
 public:
  explicit WeibullMixture(std::vector<WeibullComponent> components)
      : components_(std::move(components)) {
    detail::require(!components_.empty(), "mixture needs at least one component");
    double sum = 0.0;
    for (const auto& c : components_) {
      detail::require(c.weight >= 0.0 && c.weight <= 1.0, "mixture weights must lie in [0,1]");
      detail::require(std::isfinite(c.scale) && c.scale > 0.0, "Weibull scale must be > 0");
      detail::require(std::isfinite(c.shape) && c.shape > 0.0, "Weibull shape must be > 0");
      sum += c.weight;
    }
    detail::require(std::abs(sum - 1.0) <= 1e-9,
                    "mixture weights must sum to 1 (got " + std::to_string(sum) + ")");
  }

  static WeibullMixture single(double scale, double shape) {
    return WeibullMixture({{1.0, scale, shape}});
  }

  [[nodiscard]] const std::vector<WeibullComponent>& components() const noexcept {
    return components_;
  }
  [[nodiscard]] std::size_t size() const noexcept { return components_.size(); }

  [[nodiscard]] double pdf(double d) const {
    detail::require(d >= 0.0, "duration must be >= 0");
    double p = 0.0;
    for (const auto& c : components_)
      if (c.weight > 0.0) p += c.weight * c.pdf(d);
    return p;
  }

  [[nodiscard]] double cdf(double d) const {
    detail::require(d >= 0.0, "duration must be >= 0");
    double p = 0.0;
    for (const auto& c : components_) p += c.weight * c.cdf(d);
    return std::min(p, 1.0);
  }

  [[nodiscard]] double survival(double d) const { return 1.0 - cdf(d); }

  /// Log-density at d > 0, computed stably across components.
  [[nodiscard]] double log_pdf(double d) const noexcept {
    double best = -std::numeric_limits<double>::infinity();
    thread_local std::vector<double> terms;
    terms.clear();
    for (const auto& c : components_) {
      const double t = c.weight > 0.0 ? std::log(c.weight) + c.log_pdf(d)
                                      : -std::numeric_limits<double>::infinity();
      terms.push_back(t);
      best = std::max(best, t);
    }
    if (!std::isfinite(best)) return best;
    double s = 0.0;
    for (double t : terms) s += std::exp(t - best);
    return best + std::log(s);
  }

  /// Inverse cdf by bisection; u in [0, 1).
  [[nodiscard]] double quantile(double u) const {
    detail::require(u >= 0.0 && u < 1.0, "quantile level must lie in [0,1)");
    if (u == 0.0) return 0.0;
    double hi = 0.0;
    for (const auto& c : components_) hi = std::max(hi, c.quantile(u));
    double lo = 0.0;
    for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
      const double mid = 0.5 * (lo + hi);
      (cdf(mid) < u ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

  [[nodiscard]] double median() const { return quantile(0.5); }

  [[nodiscard]] double partial_mean(double d) const {
    detail::require(d >= 0.0, "duration must be >= 0");
    double m = 0.0;
    for (const auto& c : components_) m += c.weight * c.partial_mean(d);
    return m;
  }

  [[nodiscard]] double mean() const noexcept {
    double m = 0.0;
    for (const auto& c : components_) m += c.weight * c.scale * std::tgamma(1.0 + 1.0 / c.shape);
    return m;
  }

 private:
  std::vector<WeibullComponent> components_;
};

}  // namespace gridres
