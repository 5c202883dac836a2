#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tsbreak/autoencoder.hpp"
#include "tsbreak/errors.hpp"
#include "tsbreak/series.hpp"
#include "tsbreak/windowing.hpp"

namespace tsbreak {

struct PeakConfig {
  double min_prominence = 0.05;  // fraction of the curve maximum
  std::size_t min_separation = 1;  // curve indices
  std::size_t smooth_width = 0;    // 0 = no smoothing; otherwise odd width

  void validate() const {
    if (min_prominence < 0.0 || min_prominence > 1.0)
      throw ConfigError("min_prominence must be in [0,1]");
    if (smooth_width != 0 && smooth_width % 2 == 0)
      throw ConfigError("smooth_width must be odd");
  }
};

/// Normalized feature distance between consecutive window features:
/// ||f_t - f_prev||_2 / sqrt(||f_t||_2 * ||f_prev||_2).
inline double feature_distance(const std::vector<double>& f_t,
                               const std::vector<double>& f_prev) {
  if (f_t.size() != f_prev.size())
    throw ConfigError("feature_distance: dimension mismatch");
  double diff2 = 0.0;
  double n_t = 0.0;
  double n_prev = 0.0;
  for (std::size_t i = 0; i < f_t.size(); ++i) {
    const double d = f_t[i] - f_prev[i];
    diff2 += d * d;
    n_t += f_t[i] * f_t[i];
    n_prev += f_prev[i] * f_prev[i];
  }
  const double denom = std::sqrt(std::sqrt(n_t) * std::sqrt(n_prev));
  if (denom == 0.0)
    throw ConfigError("feature_distance: zero-norm feature vector");
  return std::sqrt(diff2) / denom;
}

/// Distances between consecutive top-layer features, aligned to the window
/// boundary timestamps. One window yields an empty curve.
inline DistanceCurve distance_curve(const AutoencoderStack& stack,
                                    const WindowedSeries& windows) {
  DistanceCurve curve;
  curve.boundary_timestamps = windows.boundary_timestamps;
  if (windows.count() < 2) return curve;
  std::vector<double> prev = encode_stack(stack, windows.vectors[0]);
  curve.values.reserve(windows.count() - 1);
  for (std::size_t t = 1; t < windows.count(); ++t) {
    std::vector<double> cur = encode_stack(stack, windows.vectors[t]);
    curve.values.push_back(feature_distance(cur, prev));
    prev = std::move(cur);
  }
  return curve;
}

/// Centered moving average with odd width; endpoints use the available
/// subwindow.
inline std::vector<double> smooth_curve(const std::vector<double>& values,
                                        std::size_t width) {
  if (width <= 1) return values;
  if (width % 2 == 0) throw ConfigError("smoothing width must be odd");
  const std::size_t half = width / 2;
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(values.size() - 1, i + half);
    double acc = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) acc += values[j];
    out[i] = acc / static_cast<double>(hi - lo + 1);
  }
  return out;
}

namespace detail {

/// Strict local maxima; a plateau (maximal run of equal values strictly
/// above both neighbors) resolves to its center index, rounding down.
/// Curve endpoints are never peaks.
inline std::vector<std::size_t> strict_local_maxima(
    const std::vector<double>& v) {
  std::vector<std::size_t> peaks;
  const std::size_t n = v.size();
  std::size_t i = 1;
  while (n >= 3 && i + 1 < n) {
    if (v[i] <= v[i - 1]) {
      ++i;
      continue;
    }
    std::size_t j = i;  // run of equal values [i, j]
    while (j + 1 < n && v[j + 1] == v[i]) ++j;
    if (j + 1 < n && v[j + 1] < v[i]) peaks.push_back(i + (j - i) / 2);
    i = j + 1;
  }
  return peaks;
}

/// Topographic prominence: height above the higher of the two base minima,
/// where each base extends to the nearest strictly higher value (or the
/// curve end).
inline double prominence_of(const std::vector<double>& v, std::size_t peak) {
  const double h = v[peak];
  double left_min = h;
  for (std::size_t i = peak; i-- > 0;) {
    if (v[i] > h) break;
    left_min = std::min(left_min, v[i]);
  }
  double right_min = h;
  for (std::size_t i = peak + 1; i < v.size(); ++i) {
    if (v[i] > h) break;
    right_min = std::min(right_min, v[i]);
  }
  return h - std::max(left_min, right_min);
}

}  // namespace detail

/// All strict local maxima of the curve, filtered by prominence (as a
/// fraction of the curve maximum) and then greedily thinned so kept peaks
/// are at least min_separation indices apart, preferring higher peaks.
/// min_prominence = 0 with min_separation <= 1 returns exactly the strict
/// local maxima.
inline std::vector<std::size_t> find_peaks(const DistanceCurve& curve,
                                           const PeakConfig& cfg) {
  cfg.validate();
  const std::vector<double> values =
      cfg.smooth_width > 1 ? smooth_curve(curve.values, cfg.smooth_width)
                           : curve.values;
  std::vector<std::size_t> candidates = detail::strict_local_maxima(values);
  if (candidates.empty()) return candidates;

  if (cfg.min_prominence > 0.0) {
    const double vmax = *std::max_element(values.begin(), values.end());
    const double threshold = cfg.min_prominence * vmax;
    std::vector<std::size_t> kept;
    for (const std::size_t p : candidates)
      if (detail::prominence_of(values, p) >= threshold) kept.push_back(p);
    candidates = std::move(kept);
  }

  if (cfg.min_separation > 1 && candidates.size() > 1) {
    std::vector<std::size_t> by_height = candidates;
    std::stable_sort(by_height.begin(), by_height.end(),
                     [&](std::size_t a, std::size_t b) {
                       if (values[a] != values[b]) return values[a] > values[b];
                       return a < b;
                     });
    std::vector<std::size_t> kept;
    for (const std::size_t p : by_height) {
      bool blocked = false;
      for (const std::size_t q : kept) {
        const std::size_t gap = p > q ? p - q : q - p;
        if (gap < cfg.min_separation) {
          blocked = true;
          break;
        }
      }
      if (!blocked) kept.push_back(p);
    }
    std::sort(kept.begin(), kept.end());
    candidates = std::move(kept);
  }
  return candidates;
}

struct DetectorConfig {
  WindowConfig window;
  StackConfig stack;
  PeakConfig peaks;
};

/// Detection from a pre-trained stack (model reuse path).
inline DetectionResult detect_with_stack(const TimeSeries& series,
                                         const AutoencoderStack& stack,
                                         const WindowedSeries& windows,
                                         const PeakConfig& peak_cfg) {
  DistanceCurve curve = distance_curve(stack, windows);
  const std::vector<std::size_t> peak_idx = find_peaks(curve, peak_cfg);
  DetectionResult result;
  result.detector_id = "autoencoder";
  result.breakpoints.reserve(peak_idx.size());
  for (const std::size_t i : peak_idx) {
    const std::size_t ts = curve.boundary_timestamps.at(i);
    if (ts > 0 && ts < series.length) result.breakpoints.push_back(ts);
  }
  result.curve = std::move(curve);
  return result;
}

/// End-to-end pipeline: scale, window, train the stack, build the distance
/// curve, select peaks, map them to original-series boundary timestamps.
/// Deterministic given the seed in the stack config.
inline DetectionResult detect(const TimeSeries& series,
                              const DetectorConfig& cfg) {
  series.validate();
  const ScalingParams scaling = fit_scaler(series);
  const WindowedSeries windows = segment(series, cfg.window, scaling);
  const AutoencoderStack stack = train_stack(windows.vectors, cfg.stack);
  return detect_with_stack(series, stack, windows, cfg.peaks);
}

}  // namespace tsbreak
