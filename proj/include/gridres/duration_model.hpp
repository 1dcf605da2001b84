// Copyright gridres contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "gridres/error.hpp"
#include "gridres/weibull_mixture.hpp"

namespace gridres {

/// Which mixture governs failures that occur outside [psi_0, psi_m].
enum class TailPolicy {
  clamp,   ///< before psi_0 use the first mixture, after psi_m the last
  reject,  ///< out-of-range failure times are an error
};

/// Failure-duration density conditioned on failure time, g(d|t), held
/// constant within each failure-time interval [psi_i, psi_{i+1}).
class DurationModel {
 public:
  DurationModel(std::vector<double> boundaries, std::vector<WeibullMixture> mixtures,
                TailPolicy tail = TailPolicy::clamp)
      : boundaries_(std::move(boundaries)), mixtures_(std::move(mixtures)), tail_(tail) {
    detail::require(boundaries_.size() >= 2, "duration model needs at least one interval");
    detail::require(mixtures_.size() + 1 == boundaries_.size(),
                    "need exactly one mixture per failure-time interval");
    for (std::size_t i = 1; i < boundaries_.size(); ++i)
      detail::require(boundaries_[i] > boundaries_[i - 1], "interval edges must increase");
  }

  /// Same mixture for every failure time, on [0, horizon].
  static DurationModel stationary(WeibullMixture g, double horizon) {
    return DurationModel({0.0, horizon}, {std::move(g)});
  }

  [[nodiscard]] const std::vector<double>& boundaries() const noexcept { return boundaries_; }
  [[nodiscard]] const std::vector<WeibullMixture>& mixtures() const noexcept { return mixtures_; }
  [[nodiscard]] std::size_t interval_count() const noexcept { return mixtures_.size(); }
  [[nodiscard]] TailPolicy tail_policy() const noexcept { return tail_; }

  [[nodiscard]] std::size_t interval_index(double t) const {
    if (tail_ == TailPolicy::reject)
      detail::require(t >= boundaries_.front() && t <= boundaries_.back(),
                      "failure time outside the duration model's intervals");
    auto it = std::upper_bound(boundaries_.begin(), boundaries_.end(), t);
    if (it == boundaries_.begin()) return 0;
    return std::min<std::size_t>(static_cast<std::size_t>(it - boundaries_.begin()) - 1,
                                 mixtures_.size() - 1);
  }

  [[nodiscard]] const WeibullMixture& at(double t) const { return mixtures_[interval_index(t)]; }

  [[nodiscard]] double pdf(double d, double t) const { return at(t).pdf(d); }
  [[nodiscard]] double cdf(double d, double t) const { return at(t).cdf(d); }

  /// Marginal duration density g(d) = sum_i w_i g_i(d), as a one-interval model.
  [[nodiscard]] DurationModel marginalize(std::span<const double> weights) const {
    detail::require(weights.size() == mixtures_.size(), "one weight per interval required");
    double total = 0.0;
    for (double w : weights) total += w;
    detail::require(std::abs(total - 1.0) <= 1e-9, "interval weights must sum to 1");
    std::vector<WeibullComponent> merged;
    for (std::size_t i = 0; i < mixtures_.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      for (WeibullComponent c : mixtures_[i].components()) {
        c.weight *= weights[i];
        merged.push_back(c);
      }
    }
    // Renormalise away accumulated rounding in the products.
    double sum = 0.0;
    for (const auto& c : merged) sum += c.weight;
    for (auto& c : merged) c.weight /= sum;
    return DurationModel({boundaries_.front(), boundaries_.back()},
                         {WeibullMixture(std::move(merged))}, tail_);
  }

 private:
  std::vector<double> boundaries_;
  std::vector<WeibullMixture> mixtures_;
  TailPolicy tail_;
};

}  // namespace gridres
