#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "tsbreak/errors.hpp"
#include "tsbreak/series.hpp"

namespace tsbreak {

enum class PeltCost {
  kNormalMean,          // mean shift, unit variance
  kNormalMeanVariance,  // mean and variance shift
  kExponential,         // rate shift, positive data
  kPoisson,             // rate shift, nonnegative integer counts
};

struct PeltConfig {
  PeltCost cost = PeltCost::kNormalMean;
  double penalty = 0.0;   // ignored when use_bic
  bool use_bic = true;    // penalty = p * log(T)
  std::size_t min_segment = 1;

  void validate() const {
    if (!use_bic && !(penalty > 0.0))
      throw ConfigError("PELT penalty must be > 0");
    if (min_segment < 1) throw ConfigError("min_segment must be >= 1");
  }
};

namespace detail {

/// Segment costs as twice the negative maximized log-likelihood, dropping
/// data-only constants. Evaluated from shared prefix sums.
class PeltCostFn {
 public:
  PeltCostFn(const std::vector<double>& data, PeltCost kind) : kind_(kind) {
    const std::size_t n = data.size();
    prefix_.assign(n + 1, 0.0);
    prefix_sq_.assign(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      prefix_[i + 1] = prefix_[i] + data[i];
      prefix_sq_[i + 1] = prefix_sq_[i] + data[i] * data[i];
    }
    if (kind == PeltCost::kExponential) {
      for (std::size_t i = 0; i < n; ++i)
        if (!(data[i] > 0.0))
          throw ConfigError("exponential cost needs positive data (sample " +
                            std::to_string(i) + " is " +
                            std::to_string(data[i]) + ")");
    }
    if (kind == PeltCost::kPoisson) {
      for (std::size_t i = 0; i < n; ++i)
        if (data[i] < 0.0 || data[i] != std::floor(data[i]))
          throw ConfigError(
              "poisson cost needs nonnegative integer data (sample " +
              std::to_string(i) + " is " + std::to_string(data[i]) + ")");
    }
  }

  /// Cost of the segment covering samples [s, t), s < t.
  double operator()(std::size_t s, std::size_t t) const {
    const double n = static_cast<double>(t - s);
    const double sum = prefix_[t] - prefix_[s];
    switch (kind_) {
      case PeltCost::kNormalMean: {
        const double sumsq = prefix_sq_[t] - prefix_sq_[s];
        return sumsq - sum * sum / n;
      }
      case PeltCost::kNormalMeanVariance: {
        const double sumsq = prefix_sq_[t] - prefix_sq_[s];
        double var = (sumsq - sum * sum / n) / n;
        if (var < 1e-12) var = 1e-12;
        return n * (std::log(2.0 * 3.14159265358979323846 * var) + 1.0);
      }
      case PeltCost::kExponential:
        return 2.0 * n * (std::log(sum / n) + 1.0);
      case PeltCost::kPoisson: {
        if (sum == 0.0) return 0.0;
        return 2.0 * sum - 2.0 * sum * std::log(sum / n);
      }
    }
    return 0.0;
  }

  /// Free parameters per segment, for the BIC penalty.
  static std::size_t param_count(PeltCost kind) {
    return kind == PeltCost::kNormalMeanVariance ? 2 : 1;
  }

 private:
  PeltCost kind_;
  std::vector<double> prefix_;
  std::vector<double> prefix_sq_;
};

/// Per-timestamp L2 norm across channels; single-channel series pass
/// through untouched.
inline std::vector<double> reduce_to_univariate(const TimeSeries& series) {
  if (series.channels == 1) return series.values[0];
  std::vector<double> out(series.length);
  for (std::size_t j = 0; j < series.length; ++j) {
    double acc = 0.0;
    for (std::size_t c = 0; c < series.channels; ++c)
      acc += series.values[c][j] * series.values[c][j];
    out[j] = std::sqrt(acc);
  }
  return out;
}

}  // namespace detail

inline double pelt_penalty(const PeltConfig& cfg, std::size_t T) {
  if (!cfg.use_bic) return cfg.penalty;
  return static_cast<double>(detail::PeltCostFn::param_count(cfg.cost)) *
         std::log(static_cast<double>(T));
}

/// Exact minimizer of sum(segment costs) + penalty * (#changepoints) via
/// the pruned dynamic program. Changepoints are the first indices of new
/// segments, strictly inside (0, T).
inline std::vector<std::size_t> pelt_partition(const std::vector<double>& data,
                                               const PeltConfig& cfg) {
  cfg.validate();
  const std::size_t T = data.size();
  if (T < 2) throw ConfigError("PELT needs at least 2 samples");
  const detail::PeltCostFn cost(data, cfg.cost);
  const double beta = pelt_penalty(cfg, T);
  const double inf = std::numeric_limits<double>::infinity();
  const std::size_t min_seg = cfg.min_segment;

  std::vector<double> F(T + 1, inf);
  std::vector<std::size_t> prev(T + 1, 0);
  F[0] = -beta;

  // pruned_at[s] = time the pruning test first failed for s. A candidate
  // pruned at t0 is dominated by a path through t0 only where that path is
  // feasible, i.e. for t >= t0 + min_seg, so it stays usable until then.
  constexpr std::size_t kNotPruned = static_cast<std::size_t>(-1);
  std::vector<std::size_t> pruned_at(T + 1, kNotPruned);
  std::vector<std::size_t> candidates{0};
  std::vector<double> totals;
  for (std::size_t t = min_seg; t <= T; ++t) {
    totals.assign(candidates.size(), inf);
    double best = inf;
    std::size_t best_s = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const std::size_t s = candidates[i];
      if (t - s < min_seg) continue;
      if (pruned_at[s] != kNotPruned && t >= pruned_at[s] + min_seg) continue;
      const double total = F[s] + cost(s, t) + beta;
      totals[i] = total;
      if (total < best) {
        best = total;
        best_s = s;
      }
    }
    F[t] = best;
    prev[t] = best_s;

    // Mark s as pruned once it cannot beat F[t]; the slack absorbs roundoff
    // so a candidate that would tie exactly in real arithmetic survives.
    const double tol = 1e-8 * (1.0 + std::abs(F[t]));
    std::vector<std::size_t> surviving;
    surviving.reserve(candidates.size() + 1);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const std::size_t s = candidates[i];
      if (t - s >= min_seg && pruned_at[s] == kNotPruned &&
          totals[i] - beta > F[t] + tol)
        pruned_at[s] = t;
      if (pruned_at[s] == kNotPruned || t + 1 < pruned_at[s] + min_seg)
        surviving.push_back(s);
    }
    surviving.push_back(t);
    candidates.swap(surviving);
  }

  std::vector<std::size_t> changepoints;
  std::size_t cur = T;
  while (cur > 0) {
    const std::size_t s = prev[cur];
    if (s > 0) changepoints.push_back(s);
    cur = s;
  }
  std::reverse(changepoints.begin(), changepoints.end());
  return changepoints;
}

/// PELT on a TimeSeries (multichannel input is reduced to its per-timestamp
/// L2 norm first).
inline DetectionResult pelt_segment(const TimeSeries& series,
                                    const PeltConfig& cfg) {
  series.validate();
  const std::vector<double> data = detail::reduce_to_univariate(series);
  DetectionResult result;
  result.breakpoints = pelt_partition(data, cfg);
  result.detector_id = "pelt";
  return result;
}

}  // namespace tsbreak
