#pragma once

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "tsbreak/errors.hpp"
#include "tsbreak/pelt.hpp"
#include "tsbreak/series.hpp"

namespace tsbreak {

/// Gaussian observations with known mean 0 and Gamma(a, b) prior (shape,
/// rate) on the precision. The series is standardized to zero mean and unit
/// scale before this model runs.
struct GammaPrecisionModel {
  double a = 1.0;
  double b = 1.0;
};

/// Gaussian observations with known variance sigma^2 and a N(mu, sigma^2)
/// prior on the mean.
struct GaussianMeanModel {
  double mu = 0.0;
  double sigma = 1.0;
};

struct BocpdConfig {
  std::variant<GammaPrecisionModel, GaussianMeanModel> model =
      GammaPrecisionModel{};
  double hazard_rate = 1000.0;     // expected run length of the segment prior
  std::size_t max_run_length = 0;  // 0 = series length
  double threshold = 0.5;          // changepoint call on P(r_t = 0)

  void validate() const {
    if (!(hazard_rate > 0.0)) throw ConfigError("hazard_rate must be > 0");
    if (threshold <= 0.0 || threshold >= 1.0)
      throw ConfigError("threshold must be in (0, 1)");
    if (const auto* g = std::get_if<GammaPrecisionModel>(&model)) {
      if (!(g->a > 0.0 && g->b > 0.0))
        throw ConfigError("gamma prior needs a > 0 and b > 0");
    } else {
      const auto& n = std::get<GaussianMeanModel>(model);
      if (!(n.sigma > 0.0)) throw ConfigError("gaussian prior needs sigma > 0");
    }
  }
};

struct BocpdResult {
  /// posterior[t][r] = P(run length = r | x_0..x_t); column t has
  /// min(t, max_run_length) + 1 entries and sums to 1.
  std::vector<std::vector<double>> posterior;
  std::vector<std::size_t> map_run_length;
  DetectionResult detection;
};

namespace detail {

struct GammaRunStats {
  double a, b;
  void absorb(double x) {
    a += 0.5;
    b += 0.5 * x * x;
  }
  /// Student-t predictive of the zero-mean Gaussian-with-Gamma-precision
  /// model.
  double predictive(double x) const {
    return std::exp(std::lgamma(a + 0.5) - std::lgamma(a) -
                    0.5 * std::log(2.0 * 3.14159265358979323846 * b) -
                    (a + 0.5) * std::log1p(x * x / (2.0 * b)));
  }
};

struct GaussianRunStats {
  double mu0, sigma2, n, sum;
  void absorb(double x) {
    n += 1.0;
    sum += x;
  }
  double predictive(double x) const {
    const double post_mean = (mu0 + sum) / (n + 1.0);
    const double var = sigma2 * (1.0 + 1.0 / (n + 1.0));
    const double d = x - post_mean;
    return std::exp(-0.5 * d * d / var) /
           std::sqrt(2.0 * 3.14159265358979323846 * var);
  }
};

template <typename Stats>
BocpdResult bocpd_filter(const std::vector<double>& data, const Stats& prior,
                         const BocpdConfig& cfg) {
  const std::size_t T = data.size();
  const std::size_t cap =
      cfg.max_run_length == 0 ? T : std::min(cfg.max_run_length, T);
  const double hazard = 1.0 / cfg.hazard_rate;

  BocpdResult out;
  out.posterior.reserve(T);
  out.map_run_length.reserve(T);

  // r_0 = 0 with probability 1; the first observation starts the first run.
  std::vector<double> prob{1.0};
  std::vector<Stats> stats{prior};
  stats[0].absorb(data.empty() ? 0.0 : data[0]);
  if (T > 0) {
    out.posterior.push_back(prob);
    out.map_run_length.push_back(0);
  }

  for (std::size_t t = 1; t < T; ++t) {
    const double x = data[t];
    const std::size_t runs = prob.size();
    const bool at_cap = runs == cap + 1;
    const std::size_t grown = at_cap ? runs : runs + 1;

    std::vector<double> next(grown, 0.0);
    std::vector<Stats> next_stats;
    next_stats.reserve(grown);

    // A changepoint at t starts a new run whose first point is x_t, so the
    // r = 0 bucket is weighted by the prior predictive.
    Stats fresh = prior;
    next[0] = hazard * fresh.predictive(x);
    fresh.absorb(x);
    next_stats.push_back(fresh);

    for (std::size_t r = 0; r < runs; ++r) {
      const double mass = prob[r] * stats[r].predictive(x) * (1.0 - hazard);
      next[std::min(r + 1, grown - 1)] += mass;  // cap bin absorbs overflow
    }
    for (std::size_t k = 1; k < grown; ++k) {
      // The cap bin merges two hypotheses; it keeps the older run's stats.
      Stats s = stats[(at_cap && k == grown - 1) ? runs - 1 : k - 1];
      s.absorb(x);
      next_stats.push_back(s);
    }

    double total = 0.0;
    for (const double p : next) total += p;
    if (!(total > 0.0)) {
      // Complete underflow: every hypothesis assigns zero density. Reset to
      // a fresh run.
      std::fill(next.begin(), next.end(), 0.0);
      next[0] = 1.0;
    } else {
      for (double& p : next) p /= total;
    }

    prob = std::move(next);
    stats = std::move(next_stats);

    std::size_t map_r = 0;
    for (std::size_t r = 1; r < prob.size(); ++r)
      if (prob[r] > prob[map_r]) map_r = r;
    out.posterior.push_back(prob);
    out.map_run_length.push_back(map_r);
    if (prob[0] > cfg.threshold)
      out.detection.breakpoints.push_back(t);
  }
  return out;
}

}  // namespace detail

/// Bayesian online changepoint detection with a constant hazard
/// 1 / hazard_rate. Emits a breakpoint at every timestamp whose posterior
/// probability of run length 0 exceeds the threshold (the new segment's
/// first sample).
inline BocpdResult bocpd_run(const TimeSeries& series, const BocpdConfig& cfg) {
  series.validate();
  cfg.validate();
  std::vector<double> data = detail::reduce_to_univariate(series);

  BocpdResult result;
  if (const auto* g = std::get_if<GammaPrecisionModel>(&cfg.model)) {
    // Standardize: the model assumes zero mean and unit-scale noise.
    double mean = 0.0;
    for (const double x : data) mean += x;
    mean /= static_cast<double>(data.size());
    double var = 0.0;
    for (const double x : data) var += (x - mean) * (x - mean);
    var /= static_cast<double>(data.size());
    const double scale = var > 0.0 ? std::sqrt(var) : 1.0;
    for (double& x : data) x = (x - mean) / scale;
    result = detail::bocpd_filter(data, detail::GammaRunStats{g->a, g->b}, cfg);
    result.detection.detector_id = "bocpd-gamma";
  } else {
    const auto& n = std::get<GaussianMeanModel>(cfg.model);
    result = detail::bocpd_filter(
        data, detail::GaussianRunStats{n.mu, n.sigma * n.sigma, 0.0, 0.0},
        cfg);
    result.detection.detector_id = "bocpd-gaussian";
  }
  return result;
}

}  // namespace tsbreak
