// Copyright gridres contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Shared fixtures and test-only oracles. The oracles here never call the
// library routine they are used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "gridres/gridres.hpp"

namespace gridres::test {

// Fitted storm-outage mixtures g1..g5, one per failure-time interval.
inline WeibullMixture table_g1() {
  return WeibullMixture({{0.486, 0.710, 1.000}, {0.257, 14.400, 10.533}, {0.257, 211.830, 10.679}});
}
inline WeibullMixture table_g2() {
  return WeibullMixture({{0.321, 2.680, 0.370},
                         {0.206, 7.640, 2.910},
                         {0.019, 21.220, 46.230},
                         {0.454, 173.580, 3.090}});
}
inline WeibullMixture table_g3() {
  return WeibullMixture({{0.143, 0.530, 2.500}, {0.472, 12.300, 15.201}, {0.385, 135.072, 4.424}});
}
inline WeibullMixture table_g4() {
  return WeibullMixture({{0.323, 11.041, 5.310}, {0.677, 112.245, 12.398}});
}
inline WeibullMixture table_g5() {
  return WeibullMixture({{0.273, 2.479, 0.987}, {0.159, 21.555, 1.702}, {0.568, 134.053, 5.070}});
}

/// Reference P{d < 13 | psi_i}, i = 1..5.
inline const std::vector<double> kTableBelow13{0.5599, 0.4716, 0.5689, 0.2927, 0.3260};

/// Interval edges for the five mixtures over a 45 h storm window. The first
/// two edges (7 a.m. / 7 p.m. / 3 a.m.) follow the storm timeline; the rest
/// are an illustrative split of the remaining hours.
inline const std::vector<double> kTableBoundaries{0.0, 12.0, 20.0, 28.0, 36.0, 45.0};

inline DurationModel table_model() {
  return DurationModel(kTableBoundaries,
                       {table_g1(), table_g2(), table_g3(), table_g4(), table_g5()});
}

/// Storm-shaped failure intensity: ~5/h background, a jump to 25/h at 12 h,
/// a ~50/h plateau for about 12 h, then back to background by 26 h.
inline RateFunction storm_rate(double horizon = 45.0) {
  return RateFunction({{0.0, 5.0},
                       {12.0, 5.0},
                       {12.5, 25.0},
                       {18.0, 50.0},
                       {24.0, 50.0},
                       {26.0, 5.0},
                       {std::min(45.0, horizon), 5.0}},
                      horizon);
}

// ---------------------------------------------------------------------------
// Quadrature oracles

/// Composite trapezoid with n panels.
inline double trapezoid(const std::function<double(double)>& f, double a, double b,
                        std::size_t n) {
  const double h = (b - a) / static_cast<double>(n);
  double s = 0.5 * (f(a) + f(b));
  for (std::size_t i = 1; i < n; ++i) s += f(a + static_cast<double>(i) * h);
  return s * h;
}

namespace detail_oracle {
inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa,
                           double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail_oracle

/// Adaptive Simpson on [a, b].
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-10, int depth = 50) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail_oracle::simpson_step(f, a, b, fa, fm, fb, whole, tol, depth);
}

/// Weibull-mixture cdf written out directly from the component formula.
inline double direct_cdf(const std::vector<WeibullComponent>& comps, double d) {
  double s = 0.0;
  for (const auto& c : comps) s += c.weight * (1.0 - std::exp(-std::pow(d / c.scale, c.shape)));
  return s;
}

/// Sup distance between two mixture cdfs on a log-spaced grid.
inline double cdf_sup_distance(const WeibullMixture& a, const WeibullMixture& b, double lo = 1e-3,
                               double hi = 1e3, std::size_t n = 4000) {
  double worst = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double d = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n));
    worst = std::max(worst, std::abs(a.cdf(d) - b.cdf(d)));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Synthetic ingest fixture

/// 5152 raw rows over Sep 12-14 2008. 2005 fall in [Sep 12 07:00, Sep 14
/// 04:00); those share 465 distinct minutes, and two of the minute groups
/// have only negative durations, so grouping then dropping negatives leaves
/// 463 entities.
struct IngestFixture {
  std::string csv;
  std::size_t raw = 5152, in_window = 2005, grouped = 465, final_count = 463;
};

inline IngestFixture ingest_fixture(std::uint64_t seed = 7) {
  Rng rng(seed);
  const Timestamp start = parse_timestamp("2008-09-12T07:00");
  const Timestamp day_start = parse_timestamp("2008-09-12T00:00");
  const Timestamp end = parse_timestamp("2008-09-14T04:00");
  const Timestamp day_end = parse_timestamp("2008-09-15T00:00");
  std::vector<std::string> rows;
  auto add = [&](const std::string& id, Timestamp t, double d) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", d);
    rows.push_back(id + "," + t.str() + "," + buf);
  };
  std::size_t id = 0;
  for (std::size_t g = 0; g < 465; ++g) {
    const Timestamp t{start.minutes + static_cast<std::int64_t>(g) * 5};
    const std::size_t size = g < 145 ? 5 : 4;
    const bool negative = g == 100 || g == 300;
    for (std::size_t k = 0; k < size; ++k) {
      const double d = negative ? -0.5 - rng.uniform() : 0.1 + 60.0 * rng.uniform();
      add("C" + std::to_string(id++), t, d);
    }
  }
  const std::int64_t before = start.minutes - day_start.minutes;
  const std::int64_t after = day_end.minutes - end.minutes;
  for (std::size_t k = 0; k < 3147; ++k) {
    Timestamp t;
    if (k % 2 == 0)
      t = {day_start.minutes + static_cast<std::int64_t>(rng.uniform() * static_cast<double>(before))};
    else
      t = {end.minutes + static_cast<std::int64_t>(rng.uniform() * static_cast<double>(after))};
    add("X" + std::to_string(k), t, 0.1 + 30.0 * rng.uniform());
  }
  // Interleave so the file order is not the canonical order.
  for (std::size_t i = rows.size() - 1; i > 0; --i)
    std::swap(rows[i], rows[static_cast<std::size_t>(rng.uniform() * static_cast<double>(i + 1))]);
  IngestFixture fx;
  fx.csv = "id,timestamp,duration_hours\n";
  for (const auto& r : rows) fx.csv += r + "\n";
  return fx;
}

}  // namespace gridres::test
