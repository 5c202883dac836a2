#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tsbreak/errors.hpp"
#include "tsbreak/series.hpp"

namespace tsbreak {

struct WindowConfig {
  std::size_t window_size = 1;  // N_w
  std::size_t stride = 1;

  void validate(std::size_t T) const {
    if (window_size < 1 || window_size > T)
      throw ConfigError("window size " + std::to_string(window_size) +
                        " must be in [1, " + std::to_string(T) + "]");
    if (stride < 1 || stride > window_size)
      throw ConfigError("stride " + std::to_string(stride) +
                        " must be in [1, " + std::to_string(window_size) +
                        "]");
  }
};

/// Half-overlapping windows by default: stride = ceil(N_w / 2), at least 1.
inline WindowConfig default_window_config(std::size_t window_size) {
  WindowConfig cfg;
  cfg.window_size = window_size;
  cfg.stride = std::max<std::size_t>(1, (window_size + 1) / 2);
  return cfg;
}

/// Per-channel affine scaling into [0,1]; required because the decoder output
/// is sigmoid-bounded.
struct ScalingParams {
  std::vector<double> min;
  std::vector<double> max;
};

/// Stacked window vectors s_t of dimension Nc * N_w, components in [0,1].
/// boundary_timestamps[i] is the original-series index associated with the
/// boundary between window i and window i+1 (0-based), so it aligns with
/// entry i of the distance curve.
struct WindowedSeries {
  std::vector<std::vector<double>> vectors;
  std::vector<std::size_t> boundary_timestamps;  // size M-1
  WindowConfig config;
  ScalingParams scaling;

  std::size_t count() const { return vectors.size(); }
  std::size_t dim() const { return vectors.empty() ? 0 : vectors[0].size(); }
};

/// Per-channel min/max over the full series. Fitting on the whole series
/// (not per window) keeps level shifts visible across windows.
inline ScalingParams fit_scaler(const TimeSeries& series) {
  ScalingParams p;
  p.min.resize(series.channels);
  p.max.resize(series.channels);
  for (std::size_t c = 0; c < series.channels; ++c) {
    const auto [lo, hi] =
        std::minmax_element(series.values[c].begin(), series.values[c].end());
    p.min[c] = *lo;
    p.max[c] = *hi;
  }
  return p;
}

/// Number of full windows: floor((T - N_w) / stride) + 1.
inline std::size_t window_count(std::size_t T, const WindowConfig& cfg) {
  return (T - cfg.window_size) / cfg.stride + 1;
}

/// Partitions the series into stacked, scaled window vectors. Window t
/// (0-based) covers original indices [t*stride, t*stride + N_w); components
/// are grouped by channel (all N_w samples of channel 0, then channel 1, ...)
/// and mapped by x -> (x - min) / (max - min). A constant channel maps to
/// 0.5. Trailing samples that do not fill a window are dropped.
inline WindowedSeries segment(const TimeSeries& series,
                              const WindowConfig& cfg,
                              const ScalingParams& scaling) {
  cfg.validate(series.length);
  if (scaling.min.size() != series.channels ||
      scaling.max.size() != series.channels)
    throw ConfigError("scaling params do not match channel count");

  const std::size_t M = window_count(series.length, cfg);
  WindowedSeries out;
  out.config = cfg;
  out.scaling = scaling;
  out.vectors.assign(M, std::vector<double>(series.channels * cfg.window_size));
  for (std::size_t t = 0; t < M; ++t) {
    const std::size_t start = t * cfg.stride;
    for (std::size_t c = 0; c < series.channels; ++c) {
      const double lo = scaling.min[c];
      const double range = scaling.max[c] - lo;
      for (std::size_t k = 0; k < cfg.window_size; ++k) {
        const double x = series.values[c][start + k];
        out.vectors[t][c * cfg.window_size + k] =
            range > 0.0 ? (x - lo) / range : 0.5;
      }
    }
  }
  out.boundary_timestamps.resize(M > 0 ? M - 1 : 0);
  for (std::size_t i = 0; i + 1 < M; ++i)
    out.boundary_timestamps[i] = (i + 1) * cfg.stride + cfg.window_size / 2;
  return out;
}

/// Inverse of the scaling map for one window vector; exact up to one
/// floating rounding unit whenever max > min.
inline std::vector<double> unscale_window(const WindowedSeries& windows,
                                          std::size_t t) {
  const std::size_t Nc = windows.scaling.min.size();
  const std::size_t Nw = windows.config.window_size;
  std::vector<double> out(windows.vectors.at(t).size());
  for (std::size_t c = 0; c < Nc; ++c) {
    const double lo = windows.scaling.min[c];
    const double range = windows.scaling.max[c] - lo;
    for (std::size_t k = 0; k < Nw; ++k)
      out[c * Nw + k] = lo + windows.vectors[t][c * Nw + k] * range;
  }
  return out;
}

/// Nearest-rank q-quantile of a nonempty list: sorted[ceil(q*n)] (1-based).
inline std::size_t nearest_rank(std::vector<std::size_t> values, double q) {
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  std::size_t rank = static_cast<std::size_t>(std::ceil(q * n));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

/// Window-size heuristic: the 0.1-quantile (nearest rank) of the true
/// segment sizes, clamped to [2, T]. Needs at least two segments.
inline std::size_t suggest_window_size(const LabelSet& labels, std::size_t T) {
  if (labels.breakpoints.empty())
    throw ConfigError(
        "window-size heuristic needs at least 2 segments (no breakpoints "
        "given)");
  const auto sizes = true_segment_sizes(labels, T);
  const std::size_t q = nearest_rank(sizes, 0.1);
  return std::clamp<std::size_t>(q, 2, T);
}

}  // namespace tsbreak
