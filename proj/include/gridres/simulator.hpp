// Copyright gridres contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "gridres/duration_model.hpp"
#include "gridres/error.hpp"
#include "gridres/random.hpp"
#include "gridres/rate_function.hpp"

namespace gridres {

struct OutageEvent {
  double failure_time = 0.0;  ///< hours
  double duration = 0.0;      ///< hours, >= 0

  [[nodiscard]] double recovery_time() const noexcept { return failure_time + duration; }
  friend bool operator==(const OutageEvent&, const OutageEvent&) = default;
};

namespace detail {

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Work is striped by
/// index; callers write results into slot i so aggregation order is fixed.
inline void parallel_for(std::size_t n, unsigned threads,
                         const std::function<void(std::size_t)>& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += threads) fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace detail

/// Replica parallelism cap from GRIDRES_THREADS, else the hardware count.
inline unsigned thread_count_from_env() {
  if (const char* env = std::getenv("GRIDRES_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// NHPP arrival times on [0, horizon] by Lewis-Shedler thinning under the
/// constant bound max(lambda).
inline std::vector<double> sample_nhpp(const RateFunction& rate, Rng& rng) {
  std::vector<double> times;
  const double bound = rate.max();
  if (bound <= 0.0) return times;
  double t = 0.0;
  for (;;) {
    t += rng.exponential(bound);
    if (t > rate.horizon()) break;
    if (rng.uniform() * bound < rate(t)) times.push_back(t);
  }
  return times;
}

inline std::vector<double> sample_nhpp(const RateFunction& rate, std::uint64_t seed) {
  Rng rng(seed);
  return sample_nhpp(rate, rng);
}

/// One duration per failure time: categorical component draw, then the
/// exact Weibull inverse cdf.
inline std::vector<double> sample_durations(std::span<const double> times,
                                            const DurationModel& g, Rng& rng) {
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    const auto& comps = g.at(t).components();
    double u = rng.uniform();
    std::size_t j = 0;
    for (; j + 1 < comps.size(); ++j) {
      if (u < comps[j].weight) break;
      u -= comps[j].weight;
    }
    out.push_back(comps[j].quantile(rng.uniform()));
  }
  return out;
}

inline std::vector<double> sample_durations(std::span<const double> times,
                                            const DurationModel& g, std::uint64_t seed) {
  Rng rng(seed);
  return sample_durations(times, g, rng);
}

/// Failures from the NHPP with durations from g, in failure-time order.
inline std::vector<OutageEvent> simulate_events(const RateFunction& rate, const DurationModel& g,
                                                std::uint64_t seed) {
  Rng rng(seed);
  const auto times = sample_nhpp(rate, rng);
  const auto durations = sample_durations(times, g, rng);
  std::vector<OutageEvent> events(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) events[i] = {times[i], durations[i]};
  return events;
}

/// Counting processes of one realisation: N_f (failures so far), N_r
/// (recoveries so far) and N = N_f - N_r (currently failed). All three are
/// right-continuous integer step functions starting at 0.
class SamplePath {
 public:
  explicit SamplePath(std::vector<OutageEvent> events) : events_(std::move(events)) {
    failures_.reserve(events_.size());
    recoveries_.reserve(events_.size());
    for (const auto& e : events_) {
      detail::require(std::isfinite(e.failure_time) && std::isfinite(e.duration),
                      "event times must be finite");
      detail::require(e.duration >= 0.0, "event durations must be >= 0");
      failures_.push_back(e.failure_time);
      recoveries_.push_back(e.recovery_time());
    }
    std::stable_sort(failures_.begin(), failures_.end());
    std::stable_sort(recoveries_.begin(), recoveries_.end());
  }

  [[nodiscard]] const std::vector<OutageEvent>& events() const noexcept { return events_; }
  [[nodiscard]] const std::vector<double>& failure_times() const noexcept { return failures_; }
  [[nodiscard]] const std::vector<double>& recovery_times() const noexcept { return recoveries_; }

  [[nodiscard]] std::int64_t failures(double t) const noexcept { return count_upto(failures_, t); }
  [[nodiscard]] std::int64_t recoveries(double t) const noexcept {
    return count_upto(recoveries_, t);
  }
  [[nodiscard]] std::int64_t in_failure(double t) const noexcept {
    return failures(t) - recoveries(t);
  }

  /// Every time at which N_f or N_r jumps, ascending and unique.
  [[nodiscard]] std::vector<double> jump_times() const {
    std::vector<double> out;
    out.reserve(failures_.size() + recoveries_.size());
    std::merge(failures_.begin(), failures_.end(), recoveries_.begin(), recoveries_.end(),
               std::back_inserter(out));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

 private:
  static std::int64_t count_upto(const std::vector<double>& sorted, double t) noexcept {
    return std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
  }

  std::vector<OutageEvent> events_;
  std::vector<double> failures_;
  std::vector<double> recoveries_;
};

inline SamplePath build_paths(std::vector<OutageEvent> events) {
  return SamplePath(std::move(events));
}

/// Monte Carlo estimate of lambda_r: recoveries per hour in a bin around each
/// grid point, averaged across replicas.
struct MonteCarloRate {
  std::vector<double> grid;
  std::vector<double> bin_lo;
  std::vector<double> bin_hi;
  std::vector<double> rate;
  std::vector<double> std_error;
  std::size_t replicas = 0;
};

/// Bins are [x - w/2, x + w/2) clipped below at 0. Replica r uses the stream
/// derive_seed(seed, r); results are reduced in replica order.
inline MonteCarloRate monte_carlo_recovery_rate(const RateFunction& rate, const DurationModel& g,
                                                std::span<const double> grid, double bin_width,
                                                std::size_t replicas, std::uint64_t seed,
                                                unsigned threads = 1) {
  detail::require(replicas >= 100, "monte carlo needs at least 100 replicas");
  detail::require(bin_width > 0.0, "bin width must be > 0");
  MonteCarloRate out;
  out.grid.assign(grid.begin(), grid.end());
  out.replicas = replicas;
  const std::size_t nb = grid.size();
  for (double x : grid) {
    out.bin_lo.push_back(std::max(0.0, x - 0.5 * bin_width));
    out.bin_hi.push_back(x + 0.5 * bin_width);
  }
  std::vector<std::uint32_t> counts(replicas * nb, 0);
  detail::parallel_for(replicas, threads, [&](std::size_t r) {
    const auto events = simulate_events(rate, g, derive_seed(seed, r));
    std::uint32_t* row = counts.data() + r * nb;
    for (const auto& e : events) {
      const double x = e.recovery_time();
      for (std::size_t b = 0; b < nb; ++b)
        if (x >= out.bin_lo[b] && x < out.bin_hi[b]) ++row[b];
    }
  });
  out.rate.assign(nb, 0.0);
  out.std_error.assign(nb, 0.0);
  const double n = static_cast<double>(replicas);
  for (std::size_t b = 0; b < nb; ++b) {
    double sum = 0.0;
    double sumsq = 0.0;
    for (std::size_t r = 0; r < replicas; ++r) {
      const double c = counts[r * nb + b];
      sum += c;
      sumsq += c * c;
    }
    const double width = out.bin_hi[b] - out.bin_lo[b];
    const double mean = sum / n;
    const double var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1.0));
    out.rate[b] = mean / width;
    out.std_error[b] = std::sqrt(var / n) / width;
  }
  return out;
}

/// Mean and standard error of N_f, N_r and N on a grid across replicas.
struct PathSummary {
  std::vector<double> grid;
  std::vector<double> failures_mean, failures_se;
  std::vector<double> recoveries_mean, recoveries_se;
  std::vector<double> in_failure_mean, in_failure_se;
  std::size_t replicas = 0;
};

inline PathSummary summarize_paths(const RateFunction& rate, const DurationModel& g,
                                   std::span<const double> grid, std::size_t replicas,
                                   std::uint64_t seed, unsigned threads = 1) {
  detail::require(replicas >= 1, "need at least one replica");
  const std::size_t ng = grid.size();
  std::vector<std::int64_t> nf(replicas * ng), nr(replicas * ng);
  detail::parallel_for(replicas, threads, [&](std::size_t r) {
    const SamplePath path(simulate_events(rate, g, derive_seed(seed, r)));
    for (std::size_t i = 0; i < ng; ++i) {
      nf[r * ng + i] = path.failures(grid[i]);
      nr[r * ng + i] = path.recoveries(grid[i]);
    }
  });
  PathSummary out;
  out.grid.assign(grid.begin(), grid.end());
  out.replicas = replicas;
  const double n = static_cast<double>(replicas);
  auto moments = [&](auto value, std::vector<double>& mean, std::vector<double>& se) {
    mean.assign(ng, 0.0);
    se.assign(ng, 0.0);
    for (std::size_t i = 0; i < ng; ++i) {
      double s = 0.0, ss = 0.0;
      for (std::size_t r = 0; r < replicas; ++r) {
        const double v = value(r * ng + i);
        s += v;
        ss += v * v;
      }
      mean[i] = s / n;
      se[i] = replicas > 1 ? std::sqrt(std::max(0.0, (ss - n * mean[i] * mean[i]) / (n - 1.0)) / n)
                           : 0.0;
    }
  };
  moments([&](std::size_t k) { return static_cast<double>(nf[k]); }, out.failures_mean,
          out.failures_se);
  moments([&](std::size_t k) { return static_cast<double>(nr[k]); }, out.recoveries_mean,
          out.recoveries_se);
  moments([&](std::size_t k) { return static_cast<double>(nf[k] - nr[k]); },
          out.in_failure_mean, out.in_failure_se);
  return out;
}

}  // namespace gridres
