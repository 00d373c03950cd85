#pragma once

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ftsweep/csv.hpp"
#include "ftsweep/errors.hpp"
#include "ftsweep/freeze.hpp"
#include "ftsweep/store.hpp"

namespace ftsweep {

struct DepthPoint {
  std::size_t depth = 0;
  double accuracy = 0.0;
};

/// How validation accuracy responds to unfreezing depth.
///  - consistent: started near the peak and never moved away from it
///  - dip: accuracy degrades past the peak depth
///  - plateau: rises, then flattens at the peak
enum class ResponseShape { kConsistent, kDip, kPlateau };

inline std::string_view shape_name(ResponseShape s) {
  switch (s) {
    case ResponseShape::kConsistent: return "consistent";
    case ResponseShape::kDip: return "dip";
    case ResponseShape::kPlateau: return "plateau";
  }
  return "plateau";
}

struct ResponseAnalysis {
  ResponseShape shape = ResponseShape::kPlateau;
  std::size_t peak_depth = 0;
  double peak_accuracy = 0.0;
  double baseline_accuracy = 0.0;          // accuracy at the shallowest depth
  std::optional<std::size_t> dip_depth;    // first depth past the peak that degrades
};

/// Classifies a depth-accuracy curve. Points are sorted by depth; at least
/// three are required. `dip_delta` is the absolute accuracy drop that counts
/// as degradation; `near_peak_eps` is the relative margin within which the
/// shallowest rung counts as already at the peak.
inline ResponseAnalysis classify_response(std::vector<DepthPoint> points, double dip_delta = 0.015,
                                          double near_peak_eps = 0.15) {
  if (points.size() < 3) {
    throw TooFewPointsError("response classification needs at least 3 depths, got " +
                            std::to_string(points.size()));
  }
  std::sort(points.begin(), points.end(),
            [](const DepthPoint& a, const DepthPoint& b) { return a.depth < b.depth; });
  for (const auto& p : points) {
    if (!(p.accuracy >= 0.0 && p.accuracy <= 1.0)) {
      throw Error("accuracy " + std::to_string(p.accuracy) + " at depth " +
                  std::to_string(p.depth) + " is outside [0, 1]");
    }
  }

  ResponseAnalysis out;
  out.baseline_accuracy = points.front().accuracy;
  std::size_t peak_idx = 0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].accuracy > points[peak_idx].accuracy) peak_idx = i;
  }
  out.peak_depth = points[peak_idx].depth;
  out.peak_accuracy = points[peak_idx].accuracy;

  const double floor_acc = out.peak_accuracy - dip_delta;
  for (std::size_t i = peak_idx + 1; i < points.size(); ++i) {
    if (points[i].accuracy < floor_acc) {
      out.shape = ResponseShape::kDip;
      out.dip_depth = points[i].depth;
      return out;
    }
  }

  const bool starts_near_peak =
      out.baseline_accuracy >= out.peak_accuracy * (1.0 - near_peak_eps);
  const bool never_degrades = std::all_of(points.begin(), points.end(), [&](const DepthPoint& p) {
    return p.accuracy >= floor_acc;
  });
  out.shape = starts_near_peak && never_degrades ? ResponseShape::kConsistent
                                                 : ResponseShape::kPlateau;
  return out;
}

/// Best rung of one architecture's results: highest accuracy, resolving ties
/// toward the smallest depth. Failed rungs are ignored; all-failed is an error.
inline RunRecord select_best_depth(std::span<const RunRecord> records) {
  const RunRecord* best = nullptr;
  for (const auto& r : records) {
    if (r.status != "ok") continue;
    if (best == nullptr || r.best_val_accuracy > best->best_val_accuracy ||
        (r.best_val_accuracy == best->best_val_accuracy && r.depth < best->depth)) {
      best = &r;
    }
  }
  if (best == nullptr) {
    throw AllRungsFailedError("no successful rungs to select a depth from");
  }
  return *best;
}

struct ReportRow {
  std::string architecture;
  std::size_t best_depth = 0;
  std::size_t total_layers = 0;
  std::size_t trainable_params = 0;
  std::size_t total_params = 0;
  double layer_ratio = 0.0;
  double param_ratio = 0.0;
  double val_accuracy = 0.0;
  std::optional<ResponseShape> shape;
  std::size_t rungs = 0;
  std::size_t failed_rungs = 0;
};

struct Report {
  std::vector<ReportRow> rows;  // accuracy descending, then fewer trainable params
  std::vector<std::string> warnings;
};

inline Report build_report(std::span<const RunRecord> records, double dip_delta = 0.015,
                           double near_peak_eps = 0.15) {
  Report report;
  std::map<std::string, std::vector<RunRecord>> by_arch;
  for (const auto& r : records) by_arch[r.architecture].push_back(r);

  for (const auto& [arch, runs] : by_arch) {
    ReportRow row;
    row.architecture = arch;
    row.rungs = runs.size();
    for (const auto& r : runs) row.failed_rungs += r.status == "failed" ? 1 : 0;

    RunRecord best;
    try {
      best = select_best_depth(runs);
    } catch (const AllRungsFailedError&) {
      report.warnings.push_back("architecture " + arch + ": every rung failed, row skipped");
      continue;
    }
    row.best_depth = best.depth;
    row.total_layers = best.total_layers;
    row.trainable_params = best.trainable_params;
    row.total_params = best.total_params;
    row.layer_ratio = best.layer_ratio;
    row.param_ratio = best.param_ratio;
    row.val_accuracy = best.best_val_accuracy;

    std::vector<DepthPoint> curve;
    for (const auto& r : runs) {
      if (r.status == "ok") curve.push_back({r.depth, r.best_val_accuracy});
    }
    try {
      row.shape = classify_response(curve, dip_delta, near_peak_eps).shape;
    } catch (const TooFewPointsError&) {
      report.warnings.push_back("architecture " + arch +
                                ": too few successful rungs to classify the response");
    }
    report.rows.push_back(std::move(row));
  }

  std::sort(report.rows.begin(), report.rows.end(), [](const ReportRow& a, const ReportRow& b) {
    if (a.val_accuracy != b.val_accuracy) return a.val_accuracy > b.val_accuracy;
    if (a.trainable_params != b.trainable_params) return a.trainable_params < b.trainable_params;
    return a.architecture < b.architecture;
  });
  return report;
}

/// Accuracy as a display percentage, truncated to one decimal, trailing
/// zero dropped: 0.955 -> "95.5", 0.95 -> "95".
inline std::string format_percent(double acc) {
  const long tenths = static_cast<long>(std::floor(acc * 1000.0 + 1e-9));
  std::string out = std::to_string(tenths / 10);
  if (tenths % 10 != 0) {
    out += '.';
    out += static_cast<char>('0' + tenths % 10);
  }
  return out;
}

inline void write_report_csv(const Report& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "architecture,best_depth,total_layers,trainable_params,total_params,"
         "layer_ratio,param_ratio,val_accuracy,val_accuracy_pct,shape,rungs,failed_rungs\n";
  for (const auto& r : report.rows) {
    out << r.architecture << ',' << r.best_depth << ',' << r.total_layers << ','
        << r.trainable_params << ',' << r.total_params << ',' << format_ratio(r.layer_ratio)
        << ',' << format_ratio(r.param_ratio) << ',' << r.val_accuracy << ','
        << format_percent(r.val_accuracy) << ','
        << (r.shape ? shape_name(*r.shape) : std::string_view("unclassified")) << ',' << r.rungs
        << ',' << r.failed_rungs << '\n';
  }
  if (!out) throw IoError("short write on " + path.string());
}

inline void write_report_markdown(const Report& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "# Depth sweep report\n\n";
  out << "| Architecture | Best depth | Trainable params | Layer ratio | Param ratio | "
         "Val accuracy (%) | Response |\n";
  out << "|---|---|---|---|---|---|---|\n";
  for (const auto& r : report.rows) {
    out << "| " << r.architecture << " | " << r.best_depth << " | " << r.trainable_params
        << " | " << format_ratio(r.layer_ratio) << " | " << format_ratio(r.param_ratio) << " | "
        << format_percent(r.val_accuracy) << " | "
        << (r.shape ? shape_name(*r.shape) : std::string_view("unclassified")) << " |\n";
  }
  if (!report.warnings.empty()) {
    out << "\n## Warnings\n\n";
    for (const auto& w : report.warnings) out << "- " << w << '\n';
  }
  if (!out) throw IoError("short write on " + path.string());
}

inline void write_report_json(const Report& report, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    nlohmann::ordered_json row;
    row["architecture"] = r.architecture;
    row["best_depth"] = r.best_depth;
    row["total_layers"] = r.total_layers;
    row["trainable_params"] = r.trainable_params;
    row["total_params"] = r.total_params;
    row["layer_ratio"] = r.layer_ratio;
    row["param_ratio"] = r.param_ratio;
    row["layer_ratio_display"] = format_ratio(r.layer_ratio);
    row["param_ratio_display"] = format_ratio(r.param_ratio);
    row["val_accuracy"] = r.val_accuracy;
    row["val_accuracy_pct"] = format_percent(r.val_accuracy);
    row["shape"] = r.shape ? std::string(shape_name(*r.shape)) : "unclassified";
    row["rungs"] = r.rungs;
    row["failed_rungs"] = r.failed_rungs;
    j["rows"].push_back(std::move(row));
  }
  j["warnings"] = report.warnings;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("short write on " + path.string());
}

}  // namespace ftsweep
