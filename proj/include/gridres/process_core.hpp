// Copyright gridres contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "gridres/duration_model.hpp"
#include "gridres/error.hpp"
#include "gridres/rate_function.hpp"

namespace gridres {

inline constexpr double kDefaultQuadStep = 0.05;  // hours

namespace detail {

/// Sorted panel edges covering [a, b]: a uniform step plus any breakpoints
/// that fall inside, so integrands are smooth within every panel.
inline std::vector<double> panel_edges(double a, double b, double step,
                                       const std::vector<double>& breaks = {}) {
  require(step > 0.0, "quadrature step must be > 0");
  std::vector<double> edges;
  if (b <= a) return edges;
  const auto n = static_cast<std::size_t>(std::ceil((b - a) / step));
  edges.reserve(n + 1 + breaks.size());
  for (std::size_t i = 0; i < n; ++i) edges.push_back(a + static_cast<double>(i) * step);
  edges.push_back(b);
  for (double x : breaks)
    if (x > a && x < b) edges.push_back(x);
  std::sort(edges.begin(), edges.end());
  const double eps = 1e-12 * std::max(1.0, std::abs(b));
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [eps](double x, double y) { return y - x <= eps; }),
              edges.end());
  edges.back() = b;
  return edges;
}

inline std::vector<double> breaks_for(const RateFunction& rate, const DurationModel& g,
                                      double a, double b) {
  std::vector<double> out = rate.breakpoints(a, b);
  for (double psi : g.boundaries())
    if (psi > a && psi < b) out.push_back(psi);
  return out;
}

}  // namespace detail

/// Probability density of the failure occurrence time, lambda_f / integral(lambda_f).
class FailureTimeDensity {
 public:
  explicit FailureTimeDensity(RateFunction rate) : rate_(std::move(rate)) {
    total_ = rate_.total();
    if (!(total_ > 0.0)) throw ValidationError("degenerate intensity");
  }

  [[nodiscard]] double operator()(double t) const noexcept {
    if (t < 0.0 || t > rate_.horizon()) return 0.0;
    return rate_(t) / total_;
  }

  /// Probability that a failure falls in [a, b].
  [[nodiscard]] double mass(double a, double b) const noexcept {
    return rate_.integral(a, b) / total_;
  }

  [[nodiscard]] double normalizer() const noexcept { return total_; }
  [[nodiscard]] const RateFunction& rate() const noexcept { return rate_; }

 private:
  RateFunction rate_;
  double total_ = 0.0;
};

inline FailureTimeDensity failure_time_pdf(const RateFunction& failure_rate) {
  return FailureTimeDensity(failure_rate);
}

/// Recovery intensity lambda_r(t) = int_0^t lambda_f(s) g(t-s|s) ds.
///
/// Panels split at every rate knot and interval boundary, so lambda_f is
/// linear and g fixed on each. Writing u = t - s, a panel contributes
/// (lambda_f(a) + slope (t - a)) dG - slope dM with M the partial mean of g,
/// which is exact and stays finite for shape < 1. Failures stop at the
/// rate's horizon; t may lie beyond it.
inline double recovery_rate(const RateFunction& failure_rate, const DurationModel& g, double t,
                            double quad_step = kDefaultQuadStep) {
  detail::require(t >= 0.0, "time must be >= 0");
  const double upper = std::min(t, failure_rate.horizon());
  const auto edges =
      detail::panel_edges(0.0, upper, quad_step, detail::breaks_for(failure_rate, g, 0.0, upper));
  double sum = 0.0;
  for (std::size_t i = 1; i < edges.size(); ++i) {
    const double a = edges[i - 1];
    const double b = edges[i];
    const WeibullMixture& mix = g.at(0.5 * (a + b));
    const double ua = t - a;
    const double ub = std::max(t - b, 0.0);
    const double la = failure_rate(a);
    const double slope = (failure_rate(b) - la) / (b - a);
    const double dG = mix.cdf(ua) - mix.cdf(ub);
    const double dM = mix.partial_mean(ua) - mix.partial_mean(ub);
    sum += (la + slope * ua) * dG - slope * dM;
  }
  return std::max(sum, 0.0);
}

/// Expected number of recoveries in [a, b]:
/// int_0^b lambda_f(s) (G(b-s|s) - G(a-s|s)) ds, Simpson per panel.
inline double expected_recoveries(const RateFunction& failure_rate, const DurationModel& g,
                                  double a, double b, double quad_step = kDefaultQuadStep) {
  detail::require(0.0 <= a && a <= b, "need 0 <= a <= b");
  const double upper = std::min(b, failure_rate.horizon());
  auto breaks = detail::breaks_for(failure_rate, g, 0.0, upper);
  breaks.push_back(a);
  const auto edges = detail::panel_edges(0.0, upper, quad_step, breaks);
  auto integrand = [&](double s, const WeibullMixture& mix) {
    const double hi = mix.cdf(std::max(b - s, 0.0));
    const double lo = mix.cdf(std::max(a - s, 0.0));
    return failure_rate(s) * (hi - lo);
  };
  double sum = 0.0;
  for (std::size_t i = 1; i < edges.size(); ++i) {
    const double lo = edges[i - 1];
    const double hi = edges[i];
    const double mid = 0.5 * (lo + hi);
    const WeibullMixture& mix = g.at(mid);
    sum += (hi - lo) / 6.0 *
           (integrand(lo, mix) + 4.0 * integrand(mid, mix) + integrand(hi, mix));
  }
  return std::max(sum, 0.0);
}

/// lambda_r tabulated on a uniform grid over [0, horizon] (defaults to the
/// failure rate's horizon).
inline RateFunction recovery_rate_curve(const RateFunction& failure_rate, const DurationModel& g,
                                        double grid_step,
                                        double quad_step = kDefaultQuadStep,
                                        std::optional<double> horizon = std::nullopt) {
  const double h = horizon.value_or(failure_rate.horizon());
  detail::require(grid_step > 0.0, "grid step must be > 0");
  std::vector<Knot> knots;
  const auto n = static_cast<std::size_t>(std::ceil(h / grid_step - 1e-9));
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = std::min(static_cast<double>(i) * grid_step, h);
    if (!knots.empty() && t <= knots.back().time) continue;
    knots.push_back({t, recovery_rate(failure_rate, g, t, quad_step)});
  }
  return RateFunction(std::move(knots), h);
}

struct ExpectedCount {
  double value = 0.0;    ///< clamped at 0
  double raw = 0.0;      ///< before clamping
  bool clamped = false;  ///< raw was negative (quadrature error)
};

/// E{N(t)} = int_0^t (lambda_f - lambda_r), exact on the union of knots.
inline ExpectedCount expected_failed(const RateFunction& failure_rate,
                                     const RateFunction& recovery_rate_fn, double t) {
  detail::require(std::abs(failure_rate.horizon() - recovery_rate_fn.horizon()) <=
                      1e-9 * std::max(1.0, failure_rate.horizon()),
                  "failure and recovery rates have mismatched horizons");
  detail::require(t >= 0.0 && t <= failure_rate.horizon() * (1.0 + 1e-12),
                  "time outside the rates' horizon");
  ExpectedCount out;
  out.raw = failure_rate.cumulative(t) - recovery_rate_fn.cumulative(t);
  out.clamped = out.raw < 0.0;
  out.value = std::max(out.raw, 0.0);
  return out;
}

/// E{N(t)} through the survival form int_0^t lambda_f(s) (1 - G(t-s|s)) ds.
/// Equal to expected_failed on exact rates; used as an independent route.
inline double expected_in_failure(const RateFunction& failure_rate, const DurationModel& g,
                                  double t, double quad_step = kDefaultQuadStep) {
  detail::require(t >= 0.0, "time must be >= 0");
  const double upper = std::min(t, failure_rate.horizon());
  const auto edges =
      detail::panel_edges(0.0, upper, quad_step, detail::breaks_for(failure_rate, g, 0.0, upper));
  double sum = 0.0;
  for (std::size_t i = 1; i < edges.size(); ++i) {
    const double lo = edges[i - 1];
    const double hi = edges[i];
    const double mid = 0.5 * (lo + hi);
    const WeibullMixture& mix = g.at(mid);
    auto f = [&](double s) { return failure_rate(s) * mix.survival(std::max(t - s, 0.0)); };
    sum += (hi - lo) / 6.0 * (f(lo) + 4.0 * f(mid) + f(hi));
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Day-to-day operation: constant failure intensity lambda_0 for all t >= 0.

/// lambda_{r,0}(t) = lambda_0 int_0^t g(t-s|s) ds, exact per failure-time interval.
inline double day_to_day_recovery_rate(double base_rate, const DurationModel& g, double t) {
  detail::require(base_rate >= 0.0, "base rate must be >= 0");
  detail::require(t >= 0.0, "time must be >= 0");
  if (t == 0.0 || base_rate == 0.0) return 0.0;
  std::vector<double> edges{0.0};
  for (double psi : g.boundaries())
    if (psi > 0.0 && psi < t) edges.push_back(psi);
  edges.push_back(t);
  double mass = 0.0;
  for (std::size_t i = 1; i < edges.size(); ++i) {
    const WeibullMixture& mix = g.at(0.5 * (edges[i - 1] + edges[i]));
    mass += mix.cdf(t - edges[i - 1]) - mix.cdf(t - edges[i]);
  }
  return base_rate * mass;
}

/// E{N_0(t)} = int_0^t (lambda_0 - lambda_{r,0}(v)) dv = lambda_0 int_0^t (1 - G(t-s|s)) ds.
inline double day_to_day_expected(double base_rate, const DurationModel& g, double t,
                                  double quad_step = kDefaultQuadStep) {
  detail::require(base_rate >= 0.0, "base rate must be >= 0");
  detail::require(t >= 0.0, "time must be >= 0");
  if (t == 0.0 || base_rate == 0.0) return 0.0;
  std::vector<double> breaks;
  for (double psi : g.boundaries()) breaks.push_back(psi);
  const auto edges = detail::panel_edges(0.0, t, quad_step, breaks);
  double sum = 0.0;
  for (std::size_t i = 1; i < edges.size(); ++i) {
    const double lo = edges[i - 1];
    const double hi = edges[i];
    const double mid = 0.5 * (lo + hi);
    const WeibullMixture& mix = g.at(mid);
    auto f = [&](double s) { return mix.survival(std::max(t - s, 0.0)); };
    sum += (hi - lo) / 6.0 * (f(lo) + 4.0 * f(mid) + f(hi));
  }
  return base_rate * sum;
}

// ---------------------------------------------------------------------------
// Surge of failures: lambda_f(t) = lambda_m(t) [u(t) - u(t - t1)] + lambda_0.

struct SurgeSpec {
  double base_rate = 0.0;  ///< lambda_0, events/hour
  RateFunction surge_rate = RateFunction::constant(0.0, 1.0);  ///< lambda_m(t)
  double surge_end = 1.0;  ///< t1, hours

  void validate() const {
    detail::require(base_rate >= 0.0, "base rate must be >= 0");
    detail::require(surge_end > 0.0, "surge end must be > 0");
    detail::require(surge_end <= surge_rate.horizon() * (1.0 + 1e-12),
                    "surge end exceeds the surge rate's horizon");
  }

  /// Peak surge intensity over base; large values justify the closed forms.
  [[nodiscard]] double dominance() const {
    return base_rate > 0.0 ? surge_rate.max() / base_rate
                           : std::numeric_limits<double>::infinity();
  }
};

/// The full failure intensity of a surge scenario on [0, horizon].
/// The drop at t1 is a linear ramp one nanohour wide.
inline RateFunction surge_failure_rate(const SurgeSpec& spec, double horizon) {
  spec.validate();
  const double t1 = spec.surge_end;
  const double ramp = 1e-9 * std::max(1.0, t1);
  detail::require(horizon > t1 + ramp, "horizon must extend past the surge");
  std::vector<Knot> knots{{0.0, spec.surge_rate(0.0) + spec.base_rate}};
  for (double x : spec.surge_rate.breakpoints(0.0, t1))
    knots.push_back({x, spec.surge_rate(x) + spec.base_rate});
  knots.push_back({t1, spec.surge_rate(t1) + spec.base_rate});
  knots.push_back({t1 + ramp, spec.base_rate});
  return RateFunction(std::move(knots), horizon);
}

/// lambda_r(t) ~= lambda_m(0) g(t|0) min{t, t1} u(t) + lambda_{r,0}(t).
inline double surge_recovery_rate(const SurgeSpec& spec, const DurationModel& g, double t) {
  spec.validate();
  detail::require(t >= 0.0, "time must be >= 0");
  double surge = 0.0;
  if (t > 0.0) {
    const double peak = spec.surge_rate(0.0);
    if (peak > 0.0) surge = peak * g.pdf(t, 0.0) * std::min(t, spec.surge_end);
  }
  return surge + day_to_day_recovery_rate(spec.base_rate, g, t);
}

enum class RecoveryRegime { general, infant_dominant, aging_dominant };

/// Closed-form E{N(t)} for a short surge.
///
/// general:  lambda_m(0) (1 - G(t|0)) min{t, t1} + E{N_0(t)}
/// infant:   as general before d0, E{N_0(t)} from d0 on
/// aging:    lambda_m(0) min{t, t1} + E{N_0(t)} before d0,
///           lambda_m(0) t1 (1 - G(t|0)) + E{N_0(t)} from d0 on
inline double surge_expected(const SurgeSpec& spec, const DurationModel& g, double t,
                             RecoveryRegime regime, std::optional<double> threshold = std::nullopt,
                             double quad_step = kDefaultQuadStep) {
  spec.validate();
  detail::require(t >= 0.0, "time must be >= 0");
  const double t1 = spec.surge_end;
  if (regime != RecoveryRegime::general) {
    detail::require(threshold.has_value(), "infant/aging regimes need a threshold d0");
    if (!(*threshold > t1)) throw ValidationError("closed form requires d0 > t1");
  }
  const double base = day_to_day_expected(spec.base_rate, g, t, quad_step);
  const double peak = spec.surge_rate(0.0);
  if (peak == 0.0) return base;
  const double surviving = 1.0 - g.cdf(t, 0.0);
  const double arrived = std::min(t, t1);
  switch (regime) {
    case RecoveryRegime::general:
      return peak * surviving * arrived + base;
    case RecoveryRegime::infant_dominant:
      return t < *threshold ? peak * surviving * arrived + base : base;
    case RecoveryRegime::aging_dominant:
      return t < *threshold ? peak * arrived + base : peak * t1 * surviving + base;
  }
  return base;
}

}  // namespace gridres
