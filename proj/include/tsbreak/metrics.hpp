#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tsbreak/errors.hpp"
#include "tsbreak/series.hpp"

namespace tsbreak {

struct MatchConfig {
  std::size_t toleration = 0;  // tau, timestamp units
};

struct ConfusionCounts {
  std::size_t n_correct = 0;  // N_CR
  std::size_t n_truth = 0;    // N_GT
  std::size_t n_alarms = 0;   // N_AL
};

struct MatchResult {
  ConfusionCounts counts;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (truth, alarm)
};

struct RocPoint {
  std::size_t tau = 0;
  double tpr = 0.0;
  double fpr = 0.0;
};

struct EvalReport {
  ConfusionCounts counts;
  double tpr = 0.0;
  double fpr = 0.0;
  std::vector<RocPoint> roc;
  double pr = 0.0;
  double mse = 0.0;                 // may be +inf when no alarms exist
  std::optional<double> pl;         // nullopt = undefined
};

namespace detail {

/// Index of the nearest element of a sorted list to x; equidistant
/// candidates resolve to the smaller index.
inline std::size_t nearest_sorted(const std::vector<std::size_t>& sorted,
                                  std::size_t x) {
  const auto it = std::lower_bound(sorted.begin(), sorted.end(), x);
  if (it == sorted.begin()) return 0;
  if (it == sorted.end()) return sorted.size() - 1;
  const std::size_t hi = static_cast<std::size_t>(it - sorted.begin());
  const std::size_t lo = hi - 1;
  const std::size_t d_lo = x - sorted[lo];
  const std::size_t d_hi = sorted[hi] - x;
  return d_lo <= d_hi ? lo : hi;
}

inline std::size_t absdiff(std::size_t a, std::size_t b) {
  return a > b ? a - b : b - a;
}

}  // namespace detail

/// Mutual-nearest matching with strict toleration: alarm a is correct iff
/// its nearest truth b also has a as its nearest alarm and |a - b| < tau.
/// Each truth matches at most one alarm and vice versa.
inline MatchResult match_breakpoints(const LabelSet& gt,
                                     const DetectionResult& al,
                                     const MatchConfig& cfg) {
  MatchResult result;
  result.counts.n_truth = gt.breakpoints.size();
  result.counts.n_alarms = al.breakpoints.size();
  if (gt.breakpoints.empty() || al.breakpoints.empty()) return result;
  for (std::size_t i = 0; i < al.breakpoints.size(); ++i) {
    const std::size_t a = al.breakpoints[i];
    const std::size_t bi = detail::nearest_sorted(gt.breakpoints, a);
    const std::size_t b = gt.breakpoints[bi];
    const std::size_t ai = detail::nearest_sorted(al.breakpoints, b);
    if (ai != i) continue;  // not mutual nearest
    if (detail::absdiff(a, b) < cfg.toleration) {
      result.pairs.emplace_back(b, a);
      ++result.counts.n_correct;
    }
  }
  return result;
}

/// TPR = N_CR / N_GT; FPR = (N_AL - N_CR) / N_AL, 0 when there are no
/// alarms. Undefined without ground truth.
inline std::pair<double, double> tpr_fpr(const ConfusionCounts& counts) {
  if (counts.n_truth == 0)
    throw ConfigError("TPR undefined: no ground-truth breakpoints");
  const double tpr = static_cast<double>(counts.n_correct) /
                     static_cast<double>(counts.n_truth);
  const double fpr =
      counts.n_alarms == 0
          ? 0.0
          : static_cast<double>(counts.n_alarms - counts.n_correct) /
                static_cast<double>(counts.n_alarms);
  return {tpr, fpr};
}

/// One (tau, TPR, FPR) point per toleration value; matching is recomputed
/// at every tau.
inline std::vector<RocPoint> roc_sweep(const LabelSet& gt,
                                       const DetectionResult& al,
                                       const std::vector<std::size_t>& taus) {
  if (taus.empty()) throw ConfigError("ROC sweep needs at least one tau");
  std::vector<RocPoint> out;
  out.reserve(taus.size());
  for (const std::size_t tau : taus) {
    const MatchResult m = match_breakpoints(gt, al, MatchConfig{tau});
    const auto [tpr, fpr] = tpr_fpr(m.counts);
    out.push_back(RocPoint{tau, tpr, fpr});
  }
  return out;
}

/// N_AL / N_GT.
inline double prediction_ratio(const ConfusionCounts& counts) {
  if (counts.n_truth == 0)
    throw ConfigError("prediction ratio undefined: no ground-truth breakpoints");
  return static_cast<double>(counts.n_alarms) /
         static_cast<double>(counts.n_truth);
}

/// Mean over true breakpoints of the squared distance to the closest alarm,
/// measured in window-index units (timestamp differences divided by
/// `stride`). +inf when there are no alarms.
inline double mse_nearest(const LabelSet& gt, const DetectionResult& al,
                          double stride = 1.0) {
  if (gt.breakpoints.empty())
    throw ConfigError("MSE undefined: no ground-truth breakpoints");
  if (al.breakpoints.empty()) return std::numeric_limits<double>::infinity();
  if (!(stride > 0.0)) throw ConfigError("MSE stride must be > 0");
  double acc = 0.0;
  for (const std::size_t b : gt.breakpoints) {
    const std::size_t ai = detail::nearest_sorted(al.breakpoints, b);
    const double d =
        static_cast<double>(detail::absdiff(al.breakpoints[ai], b)) / stride;
    acc += d * d;
  }
  return acc / static_cast<double>(gt.breakpoints.size());
}

/// |1 - PR| * MSE. Undefined when there are no alarms or when PR exceeds
/// the over-prediction cap.
inline std::optional<double> prediction_loss(double pr, double mse,
                                             const ConfusionCounts& counts,
                                             double max_ratio = 100.0) {
  if (counts.n_alarms == 0) return std::nullopt;
  if (pr > max_ratio) return std::nullopt;
  if (pr == 1.0) return 0.0;
  return std::abs(1.0 - pr) * mse;
}

struct EvalConfig {
  std::size_t tau = 10;             // primary toleration
  std::vector<std::size_t> taus;    // ROC sweep; defaults to 1..2*tau
  double mse_stride = 1.0;
  double pl_max_ratio = 100.0;
};

/// Full evaluation of one detection against ground truth.
inline EvalReport evaluate_detection(const LabelSet& gt,
                                     const DetectionResult& al,
                                     const EvalConfig& cfg) {
  EvalReport report;
  const MatchResult m = match_breakpoints(gt, al, MatchConfig{cfg.tau});
  report.counts = m.counts;
  std::tie(report.tpr, report.fpr) = tpr_fpr(m.counts);
  std::vector<std::size_t> taus = cfg.taus;
  if (taus.empty())
    for (std::size_t t = 1; t <= 2 * cfg.tau; ++t) taus.push_back(t);
  report.roc = roc_sweep(gt, al, taus);
  report.pr = prediction_ratio(m.counts);
  report.mse = mse_nearest(gt, al, cfg.mse_stride);
  report.pl = prediction_loss(report.pr, report.mse, m.counts,
                              cfg.pl_max_ratio);
  return report;
}

}  // namespace tsbreak
