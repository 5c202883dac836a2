#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsbreak/errors.hpp"
#include "tsbreak/metrics.hpp"
#include "tsbreak/series.hpp"

namespace tsbreak {

inline nlohmann::json detection_to_json(const DetectionResult& result) {
  nlohmann::json j;
  j["detector_id"] = result.detector_id;
  j["breakpoints"] = result.breakpoints;
  if (result.curve.has_value()) {
    j["curve"] = {{"timestamps", result.curve->boundary_timestamps},
                  {"values", result.curve->values}};
  }
  return j;
}

inline DetectionResult detection_from_json(const nlohmann::json& j) {
  DetectionResult result;
  result.detector_id = j.at("detector_id").get<std::string>();
  result.breakpoints = j.at("breakpoints").get<std::vector<std::size_t>>();
  if (j.contains("curve")) {
    DistanceCurve curve;
    curve.boundary_timestamps =
        j["curve"].at("timestamps").get<std::vector<std::size_t>>();
    curve.values = j["curve"].at("values").get<std::vector<double>>();
    result.curve = std::move(curve);
  }
  return result;
}

inline void save_detection(const DetectionResult& result,
                           const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << detection_to_json(result).dump(2) << '\n';
}

inline DetectionResult load_detection(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
    return detection_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad detection file '" + path + "': " + e.what());
  }
}

/// Infinite MSE serializes as the string "inf" and an undefined prediction
/// loss as "undef", matching the CSV conventions.
inline nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["counts"] = {{"n_correct", report.counts.n_correct},
                 {"n_truth", report.counts.n_truth},
                 {"n_alarms", report.counts.n_alarms}};
  j["tpr"] = report.tpr;
  j["fpr"] = report.fpr;
  j["roc"] = nlohmann::json::array();
  for (const auto& p : report.roc)
    j["roc"].push_back({{"tau", p.tau}, {"tpr", p.tpr}, {"fpr", p.fpr}});
  j["pr"] = report.pr;
  if (std::isfinite(report.mse))
    j["mse"] = report.mse;
  else
    j["mse"] = "inf";
  if (report.pl.has_value())
    j["pl"] = *report.pl;
  else
    j["pl"] = "undef";
  return j;
}

inline void save_report(const EvalReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << report_to_json(report).dump(2) << '\n';
}

inline void save_curve_csv(const DistanceCurve& curve,
                           const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << "timestamp,distance\n";
  for (std::size_t i = 0; i < curve.values.size(); ++i)
    out << curve.boundary_timestamps[i] << ','
        << detail::format_double(curve.values[i]) << '\n';
}

inline void save_roc_csv(const std::vector<RocPoint>& roc,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << "tau,tpr,fpr\n";
  for (const auto& p : roc)
    out << p.tau << ',' << detail::format_double(p.tpr) << ','
        << detail::format_double(p.fpr) << '\n';
}

/// Run-length posterior, one row per timestep: t followed by
/// P(run length = 0..r_max | x_0..x_t).
inline void save_posterior_csv(
    const std::vector<std::vector<double>>& posterior,
    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  for (std::size_t t = 0; t < posterior.size(); ++t) {
    out << t;
    for (const double p : posterior[t]) out << ',' << detail::format_double(p);
    out << '\n';
  }
}

/// Comparison table: one row per detector with its PR, MSE, PL columns.
inline void save_comparison_csv(
    const std::vector<std::pair<std::string, EvalReport>>& rows,
    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << "detector,pr,mse,pl\n";
  for (const auto& [name, report] : rows) {
    out << name << ',' << detail::format_double(report.pr) << ',';
    if (std::isfinite(report.mse))
      out << detail::format_double(report.mse);
    else
      out << "inf";
    out << ',';
    if (report.pl.has_value())
      out << detail::format_double(*report.pl);
    else
      out << "undef";
    out << '\n';
  }
}

}  // namespace tsbreak
