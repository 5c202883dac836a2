#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tsbreak/errors.hpp"

namespace tsbreak {

/// Writes a warning to the diagnostic stream unless TSBREAK_LOG=quiet.
inline void log_warn(const std::string& msg) {
  const char* level = std::getenv("TSBREAK_LOG");
  if (level != nullptr && std::string(level) == "quiet") return;
  std::cerr << "tsbreak: warning: " << msg << '\n';
}

enum class CsvLayout { kChannelsAsColumns, kChannelsAsRows };

/// A multichannel series stored channel-major: values[c][j] is channel c at
/// timestamp j. Timestamps are 0-based; a breakpoint at index b separates
/// sample b-1 from sample b. Immutable by convention after construction.
struct TimeSeries {
  std::size_t channels = 0;  // Nc
  std::size_t length = 0;    // T
  std::vector<std::vector<double>> values;
  std::vector<std::string> channel_names;  // empty or size Nc
  std::string origin;

  void validate() const {
    if (channels < 1) throw ConfigError("time series needs at least 1 channel");
    if (length < 2) throw ConfigError("time series needs at least 2 samples");
    if (values.size() != channels)
      throw ConfigError("channel count does not match value rows");
    for (std::size_t c = 0; c < channels; ++c) {
      if (values[c].size() != length)
        throw ConfigError("channel " + std::to_string(c) +
                          " has wrong length");
      for (std::size_t j = 0; j < length; ++j) {
        if (!std::isfinite(values[c][j]))
          throw ConfigError("non-finite value at channel " +
                            std::to_string(c) + ", timestamp " +
                            std::to_string(j));
      }
    }
    if (!channel_names.empty() && channel_names.size() != channels)
      throw ConfigError("channel name count does not match channel count");
  }
};

/// Ground-truth breakpoints: strictly increasing indices in (0, T).
struct LabelSet {
  std::vector<std::size_t> breakpoints;
  std::vector<std::string> segment_labels;  // empty or breakpoints.size()+1

  void validate(std::size_t T) const {
    for (std::size_t i = 0; i < breakpoints.size(); ++i) {
      if (breakpoints[i] == 0 || breakpoints[i] >= T)
        throw ConfigError("breakpoint " + std::to_string(breakpoints[i]) +
                          " out of range (0, " + std::to_string(T) + ")");
      if (i > 0 && breakpoints[i] <= breakpoints[i - 1])
        throw ConfigError("breakpoints not strictly increasing");
    }
    if (!segment_labels.empty() &&
        segment_labels.size() != breakpoints.size() + 1)
      throw ConfigError("segment label count must be breakpoint count + 1");
  }
};

struct DistanceCurve {
  std::vector<double> values;                 // Dist_t, length M-1
  std::vector<std::size_t> boundary_timestamps;  // aligned original indices
};

/// Alarms produced by any detector, strictly increasing indices in (0, T).
struct DetectionResult {
  std::vector<std::size_t> breakpoints;
  std::optional<DistanceCurve> curve;
  std::string detector_id;
};

namespace detail {

inline double parse_double_token(const std::string& token, std::size_t line,
                                 std::size_t column) {
  const char* begin = token.c_str();
  const char* end = begin + token.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t' ||
                         *(end - 1) == '\r'))
    --end;
  double out = 0.0;
  const auto res = std::from_chars(begin, end, out);
  if (res.ec != std::errc() || res.ptr != end)
    throw ParseError("cannot parse numeric value '" + token + "' at line " +
                     std::to_string(line) + ", column " +
                     std::to_string(column));
  if (!std::isfinite(out))
    throw ParseError("non-finite value '" + token + "' at line " +
                     std::to_string(line) + ", column " +
                     std::to_string(column));
  return out;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

/// Reads a numeric CSV into a validated TimeSeries. The on-disk orientation
/// is given by `layout`; internally the matrix is always Nc x T.
inline TimeSeries load_csv(const std::string& path, CsvLayout layout,
                           bool header = false) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");

  std::vector<std::vector<double>> rows;
  std::vector<std::string> header_names;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (header && lineno == 1) {
      header_names = fields;
      continue;
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c)
      row.push_back(detail::parse_double_token(fields[c], lineno, c + 1));
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("line " + std::to_string(lineno) + " has " +
                       std::to_string(row.size()) + " fields, expected " +
                       std::to_string(rows.front().size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("empty file '" + path + "'");

  TimeSeries ts;
  ts.origin = path;
  if (layout == CsvLayout::kChannelsAsColumns) {
    ts.channels = rows.front().size();
    ts.length = rows.size();
    ts.values.assign(ts.channels, std::vector<double>(ts.length));
    for (std::size_t j = 0; j < ts.length; ++j)
      for (std::size_t c = 0; c < ts.channels; ++c)
        ts.values[c][j] = rows[j][c];
    for (auto& name : header_names) {
      while (!name.empty() && name.back() == '\r') name.pop_back();
    }
    ts.channel_names = header_names;
  } else {
    ts.channels = rows.size();
    ts.length = rows.front().size();
    ts.values = std::move(rows);
  }
  if (!ts.channel_names.empty() && ts.channel_names.size() != ts.channels)
    ts.channel_names.clear();
  ts.validate();
  return ts;
}

/// Writes a TimeSeries so that load_csv with the same layout round-trips
/// values bit-exactly (shortest round-trip decimal form).
inline void save_csv(const TimeSeries& series, const std::string& path,
                     CsvLayout layout, bool header = false) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  if (layout == CsvLayout::kChannelsAsColumns) {
    if (header) {
      for (std::size_t c = 0; c < series.channels; ++c) {
        if (c) out << ',';
        out << (c < series.channel_names.size() ? series.channel_names[c]
                                                : "ch" + std::to_string(c));
      }
      out << '\n';
    }
    for (std::size_t j = 0; j < series.length; ++j) {
      for (std::size_t c = 0; c < series.channels; ++c) {
        if (c) out << ',';
        out << detail::format_double(series.values[c][j]);
      }
      out << '\n';
    }
  } else {
    for (std::size_t c = 0; c < series.channels; ++c) {
      for (std::size_t j = 0; j < series.length; ++j) {
        if (j) out << ',';
        out << detail::format_double(series.values[c][j]);
      }
      out << '\n';
    }
  }
}

/// Reads a label file: one breakpoint index per line, optional ",label"
/// suffix, '#' comment lines ignored. Output is sorted and deduplicated.
inline LabelSet load_labels(const std::string& path, std::size_t T) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::vector<std::pair<std::size_t, std::string>> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::string idx_tok = line;
    std::string label;
    const auto comma = line.find(',');
    if (comma != std::string::npos) {
      idx_tok = line.substr(0, comma);
      label = line.substr(comma + 1);
    }
    long long idx = 0;
    const char* begin = idx_tok.c_str();
    const char* end = begin + idx_tok.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
    const auto res = std::from_chars(begin, end, idx);
    if (res.ec != std::errc() || res.ptr != end)
      throw ParseError("non-integer breakpoint '" + idx_tok + "' at line " +
                       std::to_string(lineno));
    if (idx <= 0 || static_cast<std::size_t>(idx) >= T)
      throw ConfigError("breakpoint " + std::to_string(idx) + " at line " +
                        std::to_string(lineno) + " out of range (0, " +
                        std::to_string(T) + ")");
    entries.emplace_back(static_cast<std::size_t>(idx), label);
  }
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  LabelSet out;
  bool any_label = false;
  for (const auto& [idx, label] : entries) {
    if (!out.breakpoints.empty() && out.breakpoints.back() == idx) {
      log_warn("duplicate breakpoint " + std::to_string(idx) + " in '" +
               path + "' ignored");
      continue;
    }
    out.breakpoints.push_back(idx);
    if (!label.empty()) any_label = true;
  }
  if (any_label) {
    // Per-line labels name the segment that ends at the breakpoint; the
    // last segment gets an empty name unless a trailing label is given.
    out.segment_labels.assign(out.breakpoints.size() + 1, "");
    std::size_t k = 0;
    for (const auto& [idx, label] : entries) {
      if (k < out.breakpoints.size() && out.breakpoints[k] == idx)
        out.segment_labels[k++] = label;
    }
  }
  out.validate(T);
  return out;
}

inline void save_labels(const LabelSet& labels, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  for (std::size_t i = 0; i < labels.breakpoints.size(); ++i) {
    out << labels.breakpoints[i];
    if (i < labels.segment_labels.size() && !labels.segment_labels[i].empty())
      out << ',' << labels.segment_labels[i];
    out << '\n';
  }
}

/// Segment lengths implied by the breakpoints, with 0 and T as sentinels.
/// Always sums to T and has breakpoints.size()+1 entries.
inline std::vector<std::size_t> true_segment_sizes(const LabelSet& labels,
                                                   std::size_t T) {
  labels.validate(T);
  std::vector<std::size_t> sizes;
  sizes.reserve(labels.breakpoints.size() + 1);
  std::size_t prev = 0;
  for (const std::size_t b : labels.breakpoints) {
    sizes.push_back(b - prev);
    prev = b;
  }
  sizes.push_back(T - prev);
  return sizes;
}

}  // namespace tsbreak
