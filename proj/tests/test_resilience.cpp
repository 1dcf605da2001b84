// Copyright gridres contributors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"

namespace gridres::test {
namespace {

// Piecewise linear curve whose slope changes at `knee`.
std::vector<double> knee_curve(const std::vector<double>& grid, double knee, double before,
                               double after) {
  std::vector<double> v;
  for (double x : grid) v.push_back(x <= knee ? before * x : before * knee + after * (x - knee));
  return v;
}

TEST(Threshold, ConcaveKneeAtThirteen) {
  for (double step : {0.25, 0.125, 0.0625}) {
    const auto grid = uniform_grid(step, 48.0);
    const auto pick = pick_threshold(grid, knee_curve(grid, 13.0, 0.035, 0.005));
    EXPECT_EQ(pick.shape, CurveShape::concave) << "step=" << step;
    EXPECT_NEAR(pick.d0, 13.0, 0.25) << "step=" << step;
  }
}

TEST(Threshold, ConvexKneeUsesArgmax) {
  const auto grid = uniform_grid(0.25, 40.0);
  const auto pick = pick_threshold(grid, knee_curve(grid, 20.0, 0.005, 0.04));
  EXPECT_EQ(pick.shape, CurveShape::convex);
  EXPECT_NEAR(pick.d0, 20.0, 0.25);
  EXPECT_NEAR(pick.convex_candidate, 20.0, 0.25);
}

TEST(Threshold, StableWithoutSmoothing) {
  const auto grid = uniform_grid(0.25, 48.0);
  const auto pick = pick_threshold(grid, knee_curve(grid, 13.0, 0.035, 0.005), 1);
  EXPECT_DOUBLE_EQ(pick.d0, 13.0);
}

TEST(Threshold, SymmetricCurveIsIndeterminate) {
  // Concave bend at 10 and an equal convex bend at 30.
  const auto grid = uniform_grid(0.25, 40.0);
  std::vector<double> v;
  for (double x : grid)
    v.push_back(x <= 10 ? 0.03 * x : x <= 30 ? 0.3 + 0.01 * (x - 10) : 0.5 + 0.03 * (x - 30));
  const auto pick = pick_threshold(grid, v);
  EXPECT_EQ(pick.shape, CurveShape::indeterminate);
  EXPECT_NEAR(pick.concave_candidate, 10.0, 0.25);
  EXPECT_NEAR(pick.convex_candidate, 30.0, 0.25);
}

TEST(Threshold, BoundaryPointsNeverWin) {
  const auto grid = uniform_grid(1.0, 10.0);
  std::vector<double> v;
  for (double x : grid) v.push_back(1.0 - std::exp(-x));  // sharpest bend at 0
  const auto pick = pick_threshold(grid, v, 1);
  EXPECT_GT(pick.d0, 0.0);
  EXPECT_LT(pick.d0, 10.0);
}

TEST(Threshold, RejectsShortOrUnsortedGrids) {
  const std::vector<double> g{0, 1, 2, 3};
  EXPECT_THROW(pick_threshold(g, g), ValidationError);
  const std::vector<double> bad{0, 1, 1, 2, 3};
  EXPECT_THROW(pick_threshold(bad, bad), ValidationError);
}

TEST(Smoothing, PreservesLinesAndShrinksAtEdges) {
  std::vector<double> line;
  for (int i = 0; i < 20; ++i) line.push_back(3.0 + 0.5 * i);
  const auto s = detail::smooth(line, 5);
  for (std::size_t i = 0; i < line.size(); ++i) EXPECT_NEAR(s[i], line[i], 1e-12);
}

TEST(Resilience, EqualWeightsOverTableModelAtThirteen) {
  const auto model = table_model();
  const std::vector<double> w(5, 0.2);
  const auto curve = resilience_curve(w, model, uniform_grid(0.25, 48.0), kDefaultSmoothing, 13.0);
  EXPECT_NEAR(curve.s_at_d0, 0.4438, 0.006);
  double mean = 0.0;
  for (double p : kTableBelow13) mean += 0.2 * p;
  EXPECT_NEAR(curve.s_at_d0, mean, 0.005);
  EXPECT_TRUE(curve.d0_overridden);
}

TEST(Resilience, CurveIsMonotoneCdf) {
  const auto model = table_model();
  const auto w = interval_weights(storm_rate(), kTableBoundaries);
  const auto curve = resilience_curve(w, model, uniform_grid(0.25, 300.0));
  EXPECT_EQ(curve.values.front(), 0.0);
  for (std::size_t i = 1; i < curve.values.size(); ++i)
    EXPECT_GE(curve.values[i], curve.values[i - 1]);
  EXPECT_NEAR(curve.values.back(), 1.0, 0.01);
  ASSERT_TRUE(curve.pick.has_value());
  EXPECT_NEAR(curve.s_at_d0, resilience_at(curve, curve.d0), 0.0);
  for (double x : {1.0, 13.0, 50.0}) {
    double s = 0.0;
    for (std::size_t i = 0; i < 5; ++i) s += w[i] * direct_cdf(model.mixtures()[i].components(), x);
    EXPECT_NEAR(resilience_at(curve, x), s, 1e-12);
  }
}

TEST(Resilience, WeightsFromRateAndFromTimes) {
  const auto rate = storm_rate();
  const auto w = interval_weights(rate, kTableBoundaries);
  double sum = 0.0;
  for (double x : w) sum += x;
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_NEAR(w[0], rate.integral(0, 12) / rate.total(), 1e-12);
  const auto times = sample_nhpp(rate, 3);
  const auto e = interval_weights(times, kTableBoundaries);
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(e[i], w[i], 0.05);
  EXPECT_THROW(interval_weights(std::vector<double>{}, kTableBoundaries), ValidationError);
}

TEST(Resilience, RejectsBadInputs) {
  const auto model = table_model();
  const auto grid = uniform_grid(0.25, 48.0);
  EXPECT_THROW(resilience_curve(std::vector<double>{0.5, 0.5}, model, grid), ValidationError);
  EXPECT_THROW(resilience_curve(std::vector<double>(5, 0.3), model, grid), ValidationError);
  const auto curve = resilience_curve(std::vector<double>(5, 0.2), model, grid);
  EXPECT_THROW((void)resilience_at(curve, 60.0), ValidationError);
}

TEST(Resilience, InfantAgingSplitSumsToOne) {
  for (const auto& [infant, aging] : infant_aging_split(table_model(), 13.0))
    EXPECT_NEAR(infant + aging, 1.0, 1e-15);
  EXPECT_THROW(infant_aging_split(table_model(), 0.0), ValidationError);
}

}  // namespace
}  // namespace gridres::test
