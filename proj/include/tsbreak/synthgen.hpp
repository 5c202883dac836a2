#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "tsbreak/errors.hpp"
#include "tsbreak/rng.hpp"
#include "tsbreak/series.hpp"

namespace tsbreak {

enum class SynthKind {
  kExponentialSegments,  // i.i.d. Exponential(lambda_i) per segment
  kStepMean,             // constant mean per segment plus Gaussian noise
};

struct SynthConfig {
  std::size_t T = 1000;
  std::size_t k = 4;  // changepoint count
  std::uint64_t seed = 0;
  SynthKind kind = SynthKind::kStepMean;
  double param_low = 0.5;
  double param_high = 5.0;
  double noise_sigma = 1.0;  // step_mean only

  void validate() const {
    if (T < 2) throw ConfigError("T must be >= 2");
    if (k >= T) throw ConfigError("k must be < T");
    if (!(param_low < param_high))
      throw ConfigError("param range low must be < high");
    if (noise_sigma < 0.0) throw ConfigError("noise sigma must be >= 0");
  }
};

/// Shortest segment the generator will accept between changepoints.
inline std::size_t synth_min_segment(const SynthConfig& cfg) {
  if (cfg.k == 0) return 1;
  return std::max<std::size_t>(2, cfg.T / (10 * cfg.k));
}

/// Seeded synthetic benchmark. Changepoint positions are drawn uniformly
/// from (0, T) without replacement and redrawn until every implied segment
/// meets the minimum length. Three fixed RNG streams keep outputs
/// reproducible: stream 0 positions, stream 1 segment parameters, stream 2
/// samples.
inline std::pair<TimeSeries, LabelSet> generate(const SynthConfig& cfg) {
  cfg.validate();
  const std::size_t min_seg = synth_min_segment(cfg);
  if ((cfg.k + 1) * min_seg > cfg.T)
    throw ConfigError("k = " + std::to_string(cfg.k) +
                      " changepoints cannot fit T = " + std::to_string(cfg.T) +
                      " with minimum segment length " +
                      std::to_string(min_seg));

  Rng pos_rng(stream_seed(cfg.seed, 0));
  std::vector<std::size_t> breakpoints;
  if (cfg.k > 0) {
    constexpr int kMaxAttempts = 100000;
    bool ok = false;
    for (int attempt = 0; attempt < kMaxAttempts && !ok; ++attempt) {
      breakpoints.clear();
      while (breakpoints.size() < cfg.k) {
        const std::size_t b =
            1 + static_cast<std::size_t>(pos_rng.uniform_index(cfg.T - 1));
        if (std::find(breakpoints.begin(), breakpoints.end(), b) ==
            breakpoints.end())
          breakpoints.push_back(b);
      }
      std::sort(breakpoints.begin(), breakpoints.end());
      ok = true;
      std::size_t prev = 0;
      for (const std::size_t b : breakpoints) {
        if (b - prev < min_seg) ok = false;
        prev = b;
      }
      if (cfg.T - prev < min_seg) ok = false;
    }
    if (!ok)
      throw ConfigError(
          "could not draw changepoints satisfying the minimum segment "
          "length; lower k");
  }

  Rng param_rng(stream_seed(cfg.seed, 1));
  Rng sample_rng(stream_seed(cfg.seed, 2));
  TimeSeries ts;
  ts.channels = 1;
  ts.length = cfg.T;
  ts.origin = "synthetic";
  ts.values.assign(1, std::vector<double>(cfg.T));

  std::vector<std::size_t> bounds{0};
  bounds.insert(bounds.end(), breakpoints.begin(), breakpoints.end());
  bounds.push_back(cfg.T);
  for (std::size_t seg = 0; seg + 1 < bounds.size(); ++seg) {
    const double param = param_rng.uniform(cfg.param_low, cfg.param_high);
    for (std::size_t j = bounds[seg]; j < bounds[seg + 1]; ++j) {
      if (cfg.kind == SynthKind::kExponentialSegments)
        ts.values[0][j] = sample_rng.exponential(param);
      else
        ts.values[0][j] = param + sample_rng.normal(0.0, cfg.noise_sigma);
    }
  }
  ts.validate();

  LabelSet labels;
  labels.breakpoints = std::move(breakpoints);
  labels.validate(cfg.T);
  return {std::move(ts), std::move(labels)};
}

/// Per-segment generating parameters (rate or mean), for tests that need
/// the ground-truth values the samples were drawn from.
inline std::vector<double> segment_params(const SynthConfig& cfg,
                                          std::size_t segment_count) {
  Rng param_rng(stream_seed(cfg.seed, 1));
  std::vector<double> params(segment_count);
  for (auto& p : params) p = param_rng.uniform(cfg.param_low, cfg.param_high);
  return params;
}

}  // namespace tsbreak
