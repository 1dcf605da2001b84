// Copyright gridres contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "gridres/error.hpp"

namespace gridres::stats {

inline double poisson_pmf(int j, double mean) {
  if (mean <= 0.0) return j == 0 ? 1.0 : 0.0;
  return std::exp(j * std::log(mean) - mean - std::lgamma(j + 1.0));
}

/// Upper critical value: P{X > x} = alpha for X ~ chi-square(dof).
inline double chi_square_critical(double alpha, int dof) {
  detail::require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
  detail::require(dof >= 1, "chi-square dof must be >= 1");
  boost::math::chi_squared dist(dof);
  return boost::math::quantile(boost::math::complement(dist, alpha));
}

inline double chi_square_sf(double x, int dof) {
  boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, std::max(x, 0.0)));
}

/// P{K > x} for the Kolmogorov limiting distribution.
inline double kolmogorov_sf(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 1.18) {
    // Small-x form converges faster.
    const double y = std::exp(-M_PI * M_PI / (8.0 * x * x));
    double s = 0.0;
    for (int k = 1; k <= 7; k += 2) s += std::pow(y, k * k);
    return 1.0 - std::sqrt(2.0 * M_PI) / x * s;
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// One-sample KS test of `sample` against Exp(1), with Stephens' small-n correction.
inline KsResult ks_test_unit_exponential(std::vector<double> sample) {
  detail::require(!sample.empty(), "KS test needs a sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = -std::expm1(-std::max(sample[i], 0.0));
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  const double rn = std::sqrt(n);
  return {d, kolmogorov_sf((rn + 0.12 + 0.11 / rn) * d)};
}

inline double mean(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

}  // namespace gridres::stats
