// Copyright gridres contributors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"

namespace gridres::test {
namespace {

// Convolution oracle: int lambda_f(t-u) g_i(u) du per failure-time interval,
// with u = e^y so shape < 1 densities stay integrable.
double convolution_oracle(const RateFunction& rate, const DurationModel& g, double t) {
  const auto& b = g.boundaries();
  double total = 0.0;
  const double upper = std::min(t, rate.horizon());
  for (std::size_t i = 0; i < g.interval_count(); ++i) {
    double s_lo = i == 0 ? 0.0 : b[i];
    double s_hi = i + 1 == g.interval_count() ? upper : std::min(b[i + 1], upper);
    if (i == 0) s_hi = std::min(g.interval_count() > 1 ? b[1] : upper, upper);
    if (s_hi <= s_lo) continue;
    const WeibullMixture& mix = g.mixtures()[i];
    const double u_lo = t - s_hi;
    const double u_hi = t - s_lo;
    auto f = [&](double y) {
      const double u = std::exp(y);
      return rate(t - u) * mix.pdf(u) * u;
    };
    const double y_lo = u_lo > 0.0 ? std::log(u_lo) : -40.0;
    const double y_hi = std::log(u_hi);
    const int pieces = 400;
    const double h = (y_hi - y_lo) / pieces;
    for (int k = 0; k < pieces; ++k)
      total += adaptive_simpson(f, y_lo + k * h, y_lo + (k + 1) * h, 1e-12, 25);
  }
  return total;
}

TEST(RateFunction, InterpolatesAndIntegratesExactly) {
  const RateFunction r({{0.0, 2.0}, {2.0, 6.0}, {4.0, 6.0}}, 10.0);
  EXPECT_DOUBLE_EQ(r(1.0), 4.0);
  EXPECT_DOUBLE_EQ(r(9.0), 6.0);
  EXPECT_DOUBLE_EQ(r(-1.0), 2.0);
  EXPECT_DOUBLE_EQ(r.integral(0.0, 2.0), 8.0);
  EXPECT_DOUBLE_EQ(r.total(), 8.0 + 6.0 * 8.0);
  EXPECT_DOUBLE_EQ(r.integral(1.0, 3.0), 5.0 + 6.0);
  EXPECT_DOUBLE_EQ(r.integral(9.0, 20.0), 6.0);
  EXPECT_DOUBLE_EQ(r.max(), 6.0);
}

TEST(RateFunction, RejectsBadKnots) {
  EXPECT_THROW(RateFunction({}, 1.0), ValidationError);
  EXPECT_THROW(RateFunction({{0.0, 1.0}, {0.0, 2.0}}, 1.0), ValidationError);
  EXPECT_THROW(RateFunction({{0.0, -1.0}}, 1.0), ValidationError);
  EXPECT_THROW(RateFunction({{0.0, 1.0}, {2.0, 1.0}}, 1.0), ValidationError);
}

TEST(FailureTimeDensity, NormalisesToOne) {
  const auto f = failure_time_pdf(storm_rate());
  const double total = trapezoid([&](double t) { return f(t); }, 0.0, 45.0, 90000);
  EXPECT_NEAR(total, 1.0, 1e-6);
  EXPECT_NEAR(f.mass(0.0, 45.0), 1.0, 1e-12);
  EXPECT_THROW(failure_time_pdf(RateFunction::constant(0.0, 5.0)), ValidationError);
}

TEST(RecoveryRate, ConstantExponentialIsAnalytic) {
  const double lambda = 3.0, mu = 0.4;
  const auto rate = RateFunction::constant(lambda, 50.0);
  const auto g = DurationModel::stationary(WeibullMixture::single(1.0 / mu, 1.0), 50.0);
  for (double t : {0.0, 0.3, 1.0, 5.0, 12.7, 40.0}) {
    const double exact = lambda * (1.0 - std::exp(-mu * t));
    EXPECT_NEAR(recovery_rate(rate, g, t), exact, 1e-9 * lambda);
    const double in_failure = lambda / mu * (1.0 - std::exp(-mu * t));
    EXPECT_NEAR(expected_in_failure(rate, g, t), in_failure, 1e-6);
  }
}

TEST(RecoveryRate, StormWithPiecewiseModelMatchesOracle) {
  const auto rate = storm_rate();
  const auto g = table_model();
  for (double t : {0.5, 6.0, 12.25, 15.0, 20.0, 27.3, 44.0}) {
    const double oracle = convolution_oracle(rate, g, t);
    EXPECT_NEAR(recovery_rate(rate, g, t), oracle, 1e-6 * std::max(1.0, oracle)) << "t=" << t;
  }
}

TEST(RecoveryRate, NonNegativeAndBoundedByArrivals) {
  const auto rate = storm_rate();
  const auto g = table_model();
  for (double t = 0.0; t <= 60.0; t += 0.5) {
    const double r = expected_recoveries(rate, g, 0.0, t);
    EXPECT_GE(recovery_rate(rate, g, t), 0.0);
    EXPECT_LE(r, rate.cumulative(t) + 1e-9);
  }
}

TEST(RecoveryRate, ConservationOfExpectedCounts) {
  const auto rate = storm_rate();
  const auto g = table_model();
  for (double t : {3.0, 13.0, 22.5, 30.0, 45.0}) {
    const double nf = rate.cumulative(t);
    const double nr = expected_recoveries(rate, g, 0.0, t);
    EXPECT_NEAR(nf - nr, expected_in_failure(rate, g, t), 1e-6 * nf) << "t=" << t;
  }
}

TEST(RecoveryRate, ExpectedFailedFromCurves) {
  const auto rate = storm_rate();
  const auto g = table_model();
  const auto curve = recovery_rate_curve(rate, g, 0.05);
  for (double t : {5.0, 20.0, 45.0}) {
    const auto n = expected_failed(rate, curve, t);
    EXPECT_FALSE(n.clamped);
    EXPECT_NEAR(n.value, expected_in_failure(rate, g, t), 5e-3 * rate.cumulative(t));
  }
  EXPECT_THROW((void)expected_failed(rate, RateFunction::constant(1.0, 10.0), 5.0),
               ValidationError);
}

TEST(DayToDay, ReachesBaseRateInLongRun) {
  const double lambda0 = 5.0;
  const auto mix = table_g1();
  const auto g = DurationModel::stationary(mix, 1.0);
  const double horizon = 20.0 * mix.quantile(0.99);
  EXPECT_LT(std::abs(day_to_day_recovery_rate(lambda0, g, horizon) - lambda0), 0.01 * lambda0);
  // Little's law: E{N_0} -> lambda_0 E{D}.
  EXPECT_NEAR(day_to_day_expected(lambda0, g, horizon, 0.5), lambda0 * mix.mean(),
              1e-3 * lambda0 * mix.mean());
}

TEST(DayToDay, MatchesGeneralConvolution) {
  const auto g = table_model();
  const auto rate = RateFunction::constant(5.0, 45.0);
  for (double t : {1.0, 12.0, 30.0, 45.0})
    EXPECT_NEAR(day_to_day_recovery_rate(5.0, g, t), recovery_rate(rate, g, t), 1e-9);
}

TEST(Surge, WorkedExampleWithinTenPercent) {
  SurgeSpec spec{0.0, RateFunction::constant(50.0, 1.0), 1.0};
  const auto g = DurationModel::stationary(WeibullMixture::single(10.0, 2.0), 30.0);
  const double approx = surge_recovery_rate(spec, g, 5.0);
  const double exact = recovery_rate(surge_failure_rate(spec, 30.0), g, 5.0, 0.001);
  EXPECT_NEAR(exact, 50.0 * (std::exp(-0.16) - std::exp(-0.25)), 1e-4);
  EXPECT_LT(std::abs(approx - exact) / exact, 0.10);
}

TEST(Surge, ClosedFormConvergesAsSurgeShortens) {
  const auto mix = WeibullMixture::single(10.0, 2.0);
  const auto g = DurationModel::stationary(mix, 60.0);
  double prev = 1.0;
  for (double t1 : {2.0, 1.0, 0.5, 0.25}) {
    SurgeSpec spec{5.0, RateFunction::constant(50.0, t1), t1};
    const auto rate = surge_failure_rate(spec, 60.0);
    double worst = 0.0;
    for (double t = 0.0; t <= 40.0; t += 0.5) {
      const double exact = expected_in_failure(rate, g, t, 0.01);
      if (exact <= 0.0) continue;
      const double approx = surge_expected(spec, g, t, RecoveryRegime::general);
      worst = std::max(worst, std::abs(approx - exact) / exact);
    }
    EXPECT_LE(worst, prev + 1e-12) << "t1=" << t1;
    prev = worst;
  }
  EXPECT_LT(prev, 0.10);
}

TEST(Surge, RegimesRequireThresholdAfterSurge) {
  SurgeSpec spec{1.0, RateFunction::constant(40.0, 2.0), 2.0};
  const auto g = DurationModel::stationary(table_g1(), 60.0);
  EXPECT_THROW((void)surge_expected(spec, g, 5.0, RecoveryRegime::infant_dominant, 1.5),
               ValidationError);
  EXPECT_THROW((void)surge_expected(spec, g, 5.0, RecoveryRegime::aging_dominant), ValidationError);
  const double base = day_to_day_expected(1.0, g, 20.0);
  EXPECT_NEAR(surge_expected(spec, g, 20.0, RecoveryRegime::infant_dominant, 13.0), base, 1e-12);
  EXPECT_NEAR(surge_expected(spec, g, 5.0, RecoveryRegime::aging_dominant, 13.0),
              40.0 * 2.0 + day_to_day_expected(1.0, g, 5.0), 1e-12);
}

TEST(Surge, FailureRateDropsAtSurgeEnd) {
  SurgeSpec spec{5.0, RateFunction::constant(50.0, 3.0), 3.0};
  const auto rate = surge_failure_rate(spec, 10.0);
  EXPECT_DOUBLE_EQ(rate(1.0), 55.0);
  EXPECT_DOUBLE_EQ(rate(3.5), 5.0);
  EXPECT_NEAR(rate.total(), 55.0 * 3.0 + 5.0 * 7.0, 1e-6);
  EXPECT_THROW(surge_failure_rate(SurgeSpec{-1.0, RateFunction::constant(1.0, 1.0), 1.0}, 5.0),
               ValidationError);
}

}  // namespace
}  // namespace gridres::test
