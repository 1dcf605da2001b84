// Copyright gridres contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridres/duration_model.hpp"
#include "gridres/error.hpp"
#include "gridres/process_core.hpp"
#include "gridres/random.hpp"
#include "gridres/rate_function.hpp"
#include "gridres/simulator.hpp"
#include "gridres/stats.hpp"
#include "gridres/weibull_mixture.hpp"

namespace gridres {

// ---------------------------------------------------------------------------
// Moving-average failure rate

/// lambda_hat(t) = (N(t + tau) - N(t - tau)) / (2 tau) on a uniform grid.
struct RateEstimate {
  std::vector<double> grid;  ///< hours, strictly increasing
  std::vector<double> rate;  ///< events/hour
  double window = 5.0;       ///< tau, hours
  double bin = 1.0;          ///< grid spacing, hours
  double horizon = 0.0;
  std::vector<std::string> warnings;

  [[nodiscard]] RateFunction to_rate_function() const {
    return RateFunction::tabulated(grid, rate, horizon);
  }
};

inline constexpr double kDefaultWindow = 5.0;  // hours
inline constexpr double kDefaultBin = 1.0;     // hours

/// Windows are truncated at 0 and at the horizon, and the divisor shrinks
/// to the truncated width. An event at x counts for grid point t when
/// t - tau < x <= t + tau.
inline RateEstimate estimate_rate(std::span<const double> times, double window, double bin,
                                  double horizon) {
  detail::require(window > 0.0, "moving-average window must be > 0");
  detail::require(bin > 0.0, "bin width must be > 0");
  detail::require(horizon > 0.0, "horizon must be > 0");
  std::vector<double> sorted(times.begin(), times.end());
  std::sort(sorted.begin(), sorted.end());
  RateEstimate est;
  est.window = window;
  est.bin = bin;
  est.horizon = horizon;
  if (sorted.empty()) est.warnings.emplace_back("no events: rate estimate is identically zero");
  auto upto = [&](double x) {
    return static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin());
  };
  const auto n = static_cast<std::size_t>(std::floor(horizon / bin + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) est.grid.push_back(static_cast<double>(i) * bin);
  if (horizon - est.grid.back() > 1e-9 * horizon) est.grid.push_back(horizon);
  for (double t : est.grid) {
    const double lo = t - window;
    const double hi = t + window;
    const double width = std::min(horizon, hi) - std::max(0.0, lo);
    est.rate.push_back((upto(hi) - upto(lo)) / width);
  }
  return est;
}

// ---------------------------------------------------------------------------
// Weibull mixture maximum likelihood

inline constexpr double kZeroDurationShift = 1.0 / 120.0;  // hours
inline constexpr double kMinShape = 0.05;
inline constexpr double kMaxShape = 100.0;

struct FitOptions {
  double tol = 1e-8;           ///< relative log-likelihood improvement to stop
  int max_iter = 1000;
  std::size_t starts = 5;      ///< multi-start initialisations, best kept
  int screen_iter = 25;        ///< iterations every start gets before only the leader continues
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct FitResult {
  WeibullMixture mixture;
  double log_likelihood = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  bool dropped_components = false;  ///< a component lost all responsibility mass
  std::size_t best_start = 0;
  std::vector<double> trace;        ///< log-likelihood per iteration of the kept start
};

namespace detail {

/// Weighted Weibull MLE for one component.
///
/// Solves sum w x^k ln x / sum w x^k - 1/k - mean_w(ln x) = 0 for k with
/// bracketed Newton steps (bisection fallback) on [kMinShape, kMaxShape],
/// then scale = (sum w x^k / sum w)^(1/k). Logs are shifted by their max so
/// x^k never overflows.
inline WeibullComponent weighted_weibull_mle(std::span<const double> weights,
                                             std::span<const double> log_x, double log_max,
                                             double k_start) {
  double sw = 0.0, sly = 0.0;
  for (std::size_t i = 0; i < log_x.size(); ++i) {
    sw += weights[i];
    sly += weights[i] * (log_x[i] - log_max);
  }
  const double mean_y = sly / sw;
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  auto eval = [&](double k) {
    s0 = s1 = s2 = 0.0;
    for (std::size_t i = 0; i < log_x.size(); ++i) {
      const double y = log_x[i] - log_max;
      const double e = weights[i] * std::exp(k * y);
      s0 += e;
      s1 += e * y;
      s2 += e * y * y;
    }
    const double m1 = s1 / s0;
    const double h = m1 - 1.0 / k - mean_y;
    const double dh = s2 / s0 - m1 * m1 + 1.0 / (k * k);
    return std::pair{h, dh};
  };
  double lo = kMinShape, hi = kMaxShape;
  double k = std::clamp(k_start, lo, hi);
  for (int it = 0; it < 200; ++it) {
    const auto [h, dh] = eval(k);
    if (h > 0.0) hi = k; else lo = k;
    double next = k - h / dh;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const bool done = std::abs(next - k) <= 1e-8 * std::max(1.0, k) || hi - lo <= 1e-8;
    k = next;
    if (done) break;
  }
  eval(k);
  const double scale = std::exp(log_max + std::log(s0 / sw) / k);
  return {sw, scale, k};
}

inline double mixture_log_likelihood(const std::vector<WeibullComponent>& comps,
                                     std::span<const double> log_x,
                                     std::vector<double>* resp = nullptr) {
  const std::size_t n = log_x.size();
  const std::size_t K = comps.size();
  std::vector<double> lw(K), lk(K), lg(K);
  for (std::size_t j = 0; j < K; ++j) {
    lw[j] = std::log(comps[j].weight);
    lk[j] = std::log(comps[j].shape / comps[j].scale);
    lg[j] = std::log(comps[j].scale);
  }
  std::vector<double> terms(K);
  double ll = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < K; ++j) {
      const double lz = log_x[i] - lg[j];
      terms[j] = lw[j] + lk[j] + (comps[j].shape - 1.0) * lz - std::exp(comps[j].shape * lz);
      best = std::max(best, terms[j]);
    }
    double s = 0.0;
    for (std::size_t j = 0; j < K; ++j) {
      terms[j] = std::exp(terms[j] - best);
      s += terms[j];
    }
    ll += best + std::log(s);
    if (resp)
      for (std::size_t j = 0; j < K; ++j) (*resp)[j * n + i] = terms[j] / s;
  }
  return ll;
}

/// Starting mixture from 1-D k-means on log durations (quantile centres for
/// start 0, k-means++ seeding otherwise) and per-cluster log-moment
/// Weibull estimates (var ln X = pi^2 / (6 k^2)).
inline std::vector<WeibullComponent> kmeans_start(std::span<const double> log_x, std::size_t K,
                                                  std::size_t start, std::uint64_t seed) {
  std::vector<double> sorted(log_x.begin(), log_x.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  std::vector<double> centers(K);
  if (start == 0) {
    for (std::size_t j = 0; j < K; ++j)
      centers[j] = sorted[std::min(n - 1, static_cast<std::size_t>((j + 0.5) / K * n))];
  } else {
    // k-means++ seeding: each new centre drawn with probability ~ squared distance.
    Rng rng(derive_seed(seed, start));
    auto pick = [&](double u) {
      return std::min(n - 1, static_cast<std::size_t>(u * static_cast<double>(n)));
    };
    centers[0] = sorted[pick(rng.uniform())];
    std::vector<double> d2(n);
    for (std::size_t j = 1; j < K; ++j) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < j; ++c)
          best = std::min(best, (sorted[i] - centers[c]) * (sorted[i] - centers[c]));
        d2[i] = best;
        total += best;
      }
      if (total <= 0.0) {
        centers[j] = sorted[pick(rng.uniform())];
        continue;
      }
      double u = rng.uniform() * total;
      std::size_t i = 0;
      for (; i + 1 < n; ++i) {
        if (u < d2[i]) break;
        u -= d2[i];
      }
      centers[j] = sorted[i];
    }
    std::sort(centers.begin(), centers.end());
  }
  std::vector<std::size_t> label(n, 0);
  for (int it = 0; it < 100; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < K; ++j)
        if (std::abs(sorted[i] - centers[j]) < std::abs(sorted[i] - centers[best])) best = j;
      changed |= best != label[i];
      label[i] = best;
    }
    std::vector<double> sum(K, 0.0);
    std::vector<std::size_t> cnt(K, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sum[label[i]] += sorted[i];
      ++cnt[label[i]];
    }
    for (std::size_t j = 0; j < K; ++j)
      if (cnt[j] > 0) centers[j] = sum[j] / static_cast<double>(cnt[j]);
    if (!changed && it > 0) break;
  }
  std::vector<WeibullComponent> comps(K);
  double total = 0.0;
  for (std::size_t j = 0; j < K; ++j) {
    double s = 0.0, ss = 0.0;
    std::size_t c = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (label[i] == j) {
        s += sorted[i];
        ss += sorted[i] * sorted[i];
        ++c;
      }
    double shape = 1.0;
    double mean_log = centers[j];
    if (c >= 2) {
      mean_log = s / static_cast<double>(c);
      const double var = ss / static_cast<double>(c) - mean_log * mean_log;
      if (var > 1e-12) shape = std::clamp(M_PI / std::sqrt(6.0 * var), kMinShape, kMaxShape);
    }
    constexpr double kEulerGamma = 0.5772156649015329;
    comps[j] = {std::max<double>(static_cast<double>(c), 1.0) / static_cast<double>(n),
                std::exp(mean_log + kEulerGamma / shape), shape};
    total += comps[j].weight;
  }
  for (auto& c : comps) c.weight /= total;
  return comps;
}

struct EmRun {
  std::vector<WeibullComponent> comps;
  double log_likelihood = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  bool dropped = false;
  std::vector<double> trace;
};

inline EmRun run_em(std::span<const double> log_x, double log_max,
                    std::vector<WeibullComponent> comps, const FitOptions& opt) {
  const std::size_t n = log_x.size();
  EmRun run;
  std::vector<double> resp;
  double prev = -std::numeric_limits<double>::infinity();
  for (int iter = 0;; ++iter) {
    resp.assign(comps.size() * n, 0.0);
    const double ll = mixture_log_likelihood(comps, log_x, &resp);
    run.trace.push_back(ll);
    run.iterations = iter;
    if (ll >= run.log_likelihood) {
      run.log_likelihood = ll;
      run.comps = comps;
    }
    if (iter > 0 && ll - prev <= opt.tol * std::abs(prev)) {
      run.converged = std::isfinite(ll);
      break;
    }
    if (iter >= opt.max_iter) break;
    prev = ll;

    std::vector<WeibullComponent> next;
    for (std::size_t j = 0; j < comps.size(); ++j) {
      std::span<const double> w(resp.data() + j * n, n);
      const double mass = std::accumulate(w.begin(), w.end(), 0.0);
      if (mass / static_cast<double>(n) < 1e-8) {
        run.dropped = true;
        continue;
      }
      WeibullComponent c = weighted_weibull_mle(w, log_x, log_max, comps[j].shape);
      c.weight = mass / static_cast<double>(n);
      next.push_back(c);
    }
    double total = 0.0;
    for (const auto& c : next) total += c.weight;
    for (auto& c : next) c.weight /= total;
    comps = std::move(next);
  }
  return run;
}

}  // namespace detail

/// EM fit of an n-component Weibull mixture to positive durations.
///
/// Zero durations are shifted to kZeroDurationShift. Runs `opt.starts`
/// initialisations for `opt.screen_iter` iterations each, then continues the
/// highest likelihood one (lowest start index on ties) to convergence.
inline FitResult fit_weibull_mixture(std::span<const double> durations, std::size_t n_components,
                                     const FitOptions& opt = {}) {
  detail::require(n_components >= 1, "need at least one mixture component");
  detail::require(opt.starts >= 1, "need at least one start");
  detail::require(durations.size() >= 5 * n_components,
                  "need at least " + std::to_string(5 * n_components) + " durations for " +
                      std::to_string(n_components) + " components, got " +
                      std::to_string(durations.size()));
  std::vector<double> log_x;
  log_x.reserve(durations.size());
  for (double d : durations) {
    detail::require(std::isfinite(d) && d >= 0.0, "durations must be finite and >= 0");
    log_x.push_back(std::log(d > 0.0 ? d : kZeroDurationShift));
  }
  const auto [mn, mx] = std::minmax_element(log_x.begin(), log_x.end());
  if (*mx - *mn <= 0.0) throw ValidationError("degenerate input: all durations are equal");
  const double log_max = *mx;

  FitOptions screen = opt;
  screen.max_iter = std::min(opt.max_iter, std::max(1, opt.screen_iter));
  std::vector<detail::EmRun> runs(opt.starts);
  detail::parallel_for(opt.starts, opt.threads, [&](std::size_t s) {
    runs[s] = detail::run_em(log_x, log_max,
                             detail::kmeans_start(log_x, n_components, s, opt.seed), screen);
  });
  std::size_t best = 0;
  for (std::size_t s = 1; s < runs.size(); ++s)
    if (runs[s].log_likelihood > runs[best].log_likelihood) best = s;

  auto& run = runs[best];
  if (!run.converged && run.iterations < opt.max_iter) {
    FitOptions rest = opt;
    rest.max_iter = opt.max_iter - run.iterations;
    detail::EmRun more = detail::run_em(log_x, log_max, run.comps, rest);
    run.trace.insert(run.trace.end(), more.trace.begin() + 1, more.trace.end());
    run.iterations += more.iterations;
    run.converged = more.converged;
    run.dropped = run.dropped || more.dropped;
    run.comps = std::move(more.comps);
    run.log_likelihood = more.log_likelihood;
  }
  if (run.comps.empty()) throw NumericalError("mixture fit produced no components");
  double total = 0.0;
  for (const auto& c : run.comps) total += c.weight;
  for (auto& c : run.comps) c.weight /= total;
  return FitResult{WeibullMixture(run.comps), run.log_likelihood, run.iterations, run.converged,
                   run.dropped, best, std::move(run.trace)};
}

struct DurationModelFit {
  DurationModel model;
  std::vector<FitResult> fits;  ///< one per interval
  std::vector<std::size_t> samples;

  [[nodiscard]] bool converged() const {
    return std::all_of(fits.begin(), fits.end(), [](const FitResult& f) { return f.converged; });
  }
};

/// Independent mixture fit per failure-time interval. Failures outside
/// [psi_0, psi_m] join the first or last interval.
inline DurationModelFit fit_duration_model(std::span<const OutageEvent> events,
                                           std::span<const double> boundaries,
                                           std::span<const std::size_t> components_per_interval,
                                           const FitOptions& opt = {}) {
  detail::require(boundaries.size() >= 2, "need at least two interval edges");
  detail::require(components_per_interval.size() + 1 == boundaries.size(),
                  "need one component count per interval");
  for (std::size_t i = 1; i < boundaries.size(); ++i)
    detail::require(boundaries[i] > boundaries[i - 1], "interval edges must increase");
  const std::size_t m = components_per_interval.size();
  std::vector<std::vector<double>> buckets(m);
  for (const auto& e : events) {
    auto it = std::upper_bound(boundaries.begin(), boundaries.end(), e.failure_time);
    std::size_t idx = it == boundaries.begin() ? 0 : static_cast<std::size_t>(it - boundaries.begin()) - 1;
    buckets[std::min(idx, m - 1)].push_back(e.duration);
  }
  std::string sparse;
  for (std::size_t i = 0; i < m; ++i)
    if (buckets[i].size() < 5 * components_per_interval[i])
      sparse += " interval " + std::to_string(i + 1) + " [" + std::to_string(boundaries[i]) + ", " +
                std::to_string(boundaries[i + 1]) + ") has " + std::to_string(buckets[i].size()) +
                " samples, needs " + std::to_string(5 * components_per_interval[i]) + ";";
  if (!sparse.empty()) throw ValidationError("sparse intervals:" + sparse);

  std::vector<FitResult> fits;
  std::vector<WeibullMixture> mixtures;
  std::vector<std::size_t> samples;
  for (std::size_t i = 0; i < m; ++i) {
    FitOptions o = opt;
    o.seed = derive_seed(opt.seed, i);
    fits.push_back(fit_weibull_mixture(buckets[i], components_per_interval[i], o));
    mixtures.push_back(fits.back().mixture);
    samples.push_back(buckets[i].size());
  }
  return {DurationModel(std::vector<double>(boundaries.begin(), boundaries.end()),
                        std::move(mixtures)),
          std::move(fits), std::move(samples)};
}

// ---------------------------------------------------------------------------
// Pearson chi-square test of the NHPP hypothesis

struct PooledCell {
  int first = 0;  ///< smallest count j in the cell
  int last = 0;   ///< largest count j in the cell
  double observed = 0.0;
  double expected = 0.0;
};

struct PearsonTestResult {
  double chi_square = 0.0;
  int dof = 1;
  double threshold = 0.0;
  double alpha = 0.05;
  bool rejected = false;
  std::size_t intervals = 0;     ///< m
  int max_count = 0;             ///< k = max c_i
  std::vector<double> observed;  ///< O_j, j = 0..k
  std::vector<double> expected;  ///< E_j, j = 0..k; E_k carries the tail P{X >= k}
  std::vector<PooledCell> cells;
};

inline constexpr double kMinExpectedPerCell = 1.0;

/// Decision rule: reject H0 when the statistic exceeds the upper alpha critical value.
inline PearsonTestResult pearson_decision(double chi_square, int dof, double alpha) {
  PearsonTestResult r;
  r.chi_square = chi_square;
  r.dof = dof;
  r.alpha = alpha;
  r.threshold = stats::chi_square_critical(alpha, dof);
  r.rejected = chi_square > r.threshold;
  return r;
}

/// Pooled statistic from the outcome tables O_j and E_j, j = 0..k.
///
/// Adjacent classes are pooled left to right until each cell expects at
/// least one interval; a short remainder joins the last cell. With B cells,
/// dof = B - 3 (k - 2 with k + 1 = B classes, one fitted rate function).
inline PearsonTestResult pearson_from_tables(std::vector<double> observed,
                                             std::vector<double> expected, double alpha) {
  detail::require(!observed.empty() && observed.size() == expected.size(),
                  "observed and expected tables must be non-empty and equal in length");
  const int k = static_cast<int>(observed.size()) - 1;
  std::vector<PooledCell> cells;
  PooledCell open{0, 0, 0.0, 0.0};
  for (int j = 0; j <= k; ++j) {
    open.last = j;
    open.observed += observed[j];
    open.expected += expected[j];
    if (open.expected >= kMinExpectedPerCell) {
      cells.push_back(open);
      open = {j + 1, j + 1, 0.0, 0.0};
    }
  }
  if (open.first <= k) {
    if (cells.empty()) {
      cells.push_back(open);
    } else {
      cells.back().last = open.last;
      cells.back().observed += open.observed;
      cells.back().expected += open.expected;
    }
  }
  const int dof = static_cast<int>(cells.size()) - 3;
  if (dof < 1) throw ValidationError("insufficient outcome diversity");
  double chi = 0.0;
  for (const auto& c : cells)
    if (c.expected > 0.0) chi += (c.observed - c.expected) * (c.observed - c.expected) / c.expected;

  PearsonTestResult r = pearson_decision(chi, dof, alpha);
  r.max_count = k;
  r.observed = std::move(observed);
  r.expected = std::move(expected);
  r.cells = std::move(cells);
  return r;
}

/// Statistic from per-interval counts c_i and Poisson means mu_i. Outcome
/// classes are j = 0..k with k = max c_i; E_k carries the tail P{X >= k} so
/// both tables sum to the number of intervals.
inline PearsonTestResult pearson_statistic(std::span<const int> counts,
                                           std::span<const double> means, double alpha) {
  detail::require(counts.size() == means.size(), "counts and means differ in length");
  detail::require(counts.size() >= 10, "need at least 10 intervals");
  detail::require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
  const int k = *std::max_element(counts.begin(), counts.end());
  std::vector<double> observed(k + 1, 0.0), expected(k + 1, 0.0);
  for (int c : counts) {
    detail::require(c >= 0, "counts must be >= 0");
    observed[c] += 1.0;
  }
  for (double mu : means) {
    detail::require(mu >= 0.0 && std::isfinite(mu), "interval means must be finite and >= 0");
    double below = 0.0;
    for (int j = 0; j < k; ++j) {
      const double p = stats::poisson_pmf(j, mu);
      expected[j] += p;
      below += p;
    }
    expected[k] += std::max(0.0, 1.0 - below);
  }

  PearsonTestResult r = pearson_from_tables(observed, expected, alpha);
  r.intervals = counts.size();
  return r;
}

/// Splits [start, end) into m equal intervals, counts failures in each and
/// compares the count histogram with Poisson(int lambda_hat) expectations.
inline PearsonTestResult pearson_nhpp_test(std::span<const double> times, const RateFunction& rate,
                                           std::size_t m, double alpha,
                                           std::optional<double> start = std::nullopt,
                                           std::optional<double> end = std::nullopt) {
  detail::require(m >= 10, "need at least 10 intervals");
  const double a = start.value_or(0.0);
  const double b = end.value_or(rate.horizon());
  detail::require(b > a, "test range must be non-empty");
  const double width = (b - a) / static_cast<double>(m);
  std::vector<int> counts(m, 0);
  for (double t : times) {
    if (t < a || t > b) continue;
    const auto i = std::min(m - 1, static_cast<std::size_t>((t - a) / width));
    ++counts[i];
  }
  std::vector<double> means(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double lo = a + static_cast<double>(i) * width;
    means[i] = rate.integral(lo, i + 1 == m ? b : lo + width);
  }
  return pearson_statistic(counts, means, alpha);
}

// ---------------------------------------------------------------------------
// QQ diagnostics by time rescaling

/// Gaps between successive Lambda(t_i), with Lambda(t_0) = 0. Unit-rate
/// exponential when the times come from an NHPP with this intensity.
inline std::vector<double> rescaled_interarrivals(std::span<const double> times,
                                                  const RateFunction& rate) {
  std::vector<double> sorted(times.begin(), times.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> gaps;
  gaps.reserve(sorted.size());
  double prev = 0.0;
  for (double t : sorted) {
    const double cum = rate.cumulative(t);
    gaps.push_back(cum - prev);
    prev = cum;
  }
  return gaps;
}

struct QQPoint {
  double theoretical = 0.0;  ///< Exp(1) quantile at (i - 0.5) / n
  double empirical = 0.0;    ///< i-th smallest rescaled inter-arrival
};

inline std::vector<QQPoint> qq_points(std::span<const double> times, const RateFunction& rate) {
  detail::require(times.size() >= 10, "QQ diagnostics need at least 10 events");
  auto gaps = rescaled_interarrivals(times, rate);
  std::sort(gaps.begin(), gaps.end());
  const double n = static_cast<double>(gaps.size());
  std::vector<QQPoint> pts(gaps.size());
  for (std::size_t i = 0; i < gaps.size(); ++i)
    pts[i] = {-std::log1p(-(static_cast<double>(i) + 0.5) / n), gaps[i]};
  return pts;
}

/// Largest |empirical - theoretical| over points whose plotting position is
/// at most `max_level`.
inline double qq_max_deviation(std::span<const QQPoint> pts, double max_level = 1.0) {
  double worst = 0.0;
  const double n = static_cast<double>(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if ((static_cast<double>(i) + 0.5) / n > max_level) break;
    worst = std::max(worst, std::abs(pts[i].empirical - pts[i].theoretical));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Reconstruction of the expected number in failure

struct ReconstructedCurve {
  std::vector<double> grid;
  std::vector<double> failure_rate;
  std::vector<double> recovery_rate;
  std::vector<double> in_failure;  ///< N_hat(t), unclamped
};

/// N_hat(t) = int_0^t (lambda_f - lambda_r), lambda_r from the convolution of
/// the fitted inputs, cumulated by trapezoid on a uniform grid.
inline ReconstructedCurve reconstruct(const RateFunction& failure_rate, const DurationModel& g,
                                      double grid_step = 0.25,
                                      double quad_step = kDefaultQuadStep,
                                      std::optional<double> horizon = std::nullopt) {
  detail::require(grid_step > 0.0, "grid step must be > 0");
  const double h = horizon.value_or(failure_rate.horizon());
  ReconstructedCurve out;
  const auto n = static_cast<std::size_t>(std::ceil(h / grid_step - 1e-9));
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = std::min(static_cast<double>(i) * grid_step, h);
    if (!out.grid.empty() && t <= out.grid.back()) continue;
    out.grid.push_back(t);
    out.failure_rate.push_back(t <= failure_rate.horizon() ? failure_rate(t) : 0.0);
    out.recovery_rate.push_back(recovery_rate(failure_rate, g, t, quad_step));
  }
  out.in_failure.assign(out.grid.size(), 0.0);
  for (std::size_t i = 1; i < out.grid.size(); ++i) {
    const double a = out.grid[i - 1];
    const double b = out.grid[i];
    const double fail = failure_rate.integral(a, b);
    const double rec = 0.5 * (out.recovery_rate[i - 1] + out.recovery_rate[i]) * (b - a);
    out.in_failure[i] = out.in_failure[i - 1] + fail - rec;
  }
  return out;
}

}  // namespace gridres
