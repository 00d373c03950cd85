#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "ftsweep/errors.hpp"
#include "ftsweep/store.hpp"

namespace ftsweep {

struct PlotResult {
  std::vector<std::filesystem::path> written;
  std::vector<std::string> warnings;
};

namespace detail {

inline const std::vector<cv::Scalar>& palette() {
  static const std::vector<cv::Scalar> colors = {
      {180, 119, 31},  {14, 127, 255},  {44, 160, 44},  {40, 39, 214},
      {189, 103, 148}, {75, 86, 140},   {194, 119, 227}, {127, 127, 127},
      {34, 189, 188},  {207, 190, 23},
  };
  return colors;
}

struct Series {
  std::string label;
  std::vector<double> x, y;
};

/// Compact count label: 35, 416K, 1.2M.
inline std::string human_count(double v) {
  char buf[32];
  if (v >= 1e6) std::snprintf(buf, sizeof buf, "%.1fM", v / 1e6);
  else if (v >= 1e3) std::snprintf(buf, sizeof buf, "%.0fK", v / 1e3);
  else std::snprintf(buf, sizeof buf, "%.0f", v);
  return buf;
}

struct ChartSpec {
  std::string title, x_label, y_label;
  std::vector<Series> series;  // left axis
  double y_min = 0.0, y_max = 1.0;
  std::vector<Series> series2;  // right axis, auto-scaled counts
  std::string y2_label;
};

/// Renders series onto a 1200x800 white canvas with axes, ticks, and legend.
/// Secondary series get their own right-hand axis scaled to their maximum.
inline cv::Mat line_chart(const ChartSpec& spec) {
  const int width = 1200, height = 800;
  const int left = 100, top = 70, bottom = 80;
  const int right = spec.series2.empty() ? 60 : 110;
  cv::Mat img(height, width, CV_8UC3, cv::Scalar(255, 255, 255));

  double x_min = 0.0, x_max = 1.0;
  bool first = true;
  for (const auto* group : {&spec.series, &spec.series2}) {
    for (const auto& s : *group) {
      for (const double v : s.x) {
        x_min = first ? v : std::min(x_min, v);
        x_max = first ? v : std::max(x_max, v);
        first = false;
      }
    }
  }
  if (first) return img;
  if (x_max == x_min) x_max = x_min + 1.0;
  double y_min = spec.y_min, y_max = spec.y_max;
  if (y_max == y_min) y_max = y_min + 1.0;

  double y2_max = 1.0;
  for (const auto& s : spec.series2) {
    for (const double v : s.y) y2_max = std::max(y2_max, v);
  }
  y2_max *= 1.05;

  const auto px = [&](double x) {
    return left + static_cast<int>((x - x_min) / (x_max - x_min) * (width - left - right));
  };
  const auto py = [&](double y) {
    return height - bottom -
           static_cast<int>((y - y_min) / (y_max - y_min) * (height - top - bottom));
  };
  const auto py2 = [&](double y) {
    return height - bottom - static_cast<int>(y / y2_max * (height - top - bottom));
  };

  const cv::Scalar axis_color(60, 60, 60);
  const cv::Scalar grid_color(225, 225, 225);
  const int font = cv::FONT_HERSHEY_SIMPLEX;

  for (int i = 0; i <= 5; ++i) {
    const double yv = y_min + (y_max - y_min) * i / 5.0;
    const int yy = py(yv);
    cv::line(img, {left, yy}, {width - right, yy}, grid_color, 1);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", yv);
    cv::putText(img, buf, {left - 70, yy + 5}, font, 0.5, axis_color, 1, cv::LINE_AA);
  }
  for (int i = 0; i <= 6; ++i) {
    const double xv = x_min + (x_max - x_min) * i / 6.0;
    const int xx = px(xv);
    cv::line(img, {xx, top}, {xx, height - bottom}, grid_color, 1);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0f", xv);
    cv::putText(img, buf, {xx - 10, height - bottom + 25}, font, 0.5, axis_color, 1, cv::LINE_AA);
  }
  cv::line(img, {left, top}, {left, height - bottom}, axis_color, 2);
  cv::line(img, {left, height - bottom}, {width - right, height - bottom}, axis_color, 2);
  if (!spec.series2.empty()) {
    cv::line(img, {width - right, top}, {width - right, height - bottom}, axis_color, 2);
    for (int i = 0; i <= 5; ++i) {
      const double yv = y2_max * i / 5.0;
      const int yy = py2(yv);
      cv::putText(img, human_count(yv), {width - right + 8, yy + 5}, font, 0.5, axis_color, 1,
                  cv::LINE_AA);
    }
    if (!spec.y2_label.empty()) {
      cv::putText(img, spec.y2_label, {width - right - 120, top - 25}, font, 0.6, axis_color, 1,
                  cv::LINE_AA);
    }
  }
  cv::putText(img, spec.title, {left, 40}, font, 0.9, cv::Scalar(20, 20, 20), 2, cv::LINE_AA);
  cv::putText(img, spec.x_label, {(width - left - right) / 2 + left - 40, height - 25}, font, 0.6,
              axis_color, 1, cv::LINE_AA);
  cv::putText(img, spec.y_label, {20, top - 25}, font, 0.6, axis_color, 1, cv::LINE_AA);

  int legend_y = top + 10;
  std::size_t color_index = 0;
  const bool legend = spec.series.size() + spec.series2.size() > 1;
  const auto draw = [&](const Series& s, const auto& map_y) {
    const cv::Scalar color = palette()[color_index++ % palette().size()];
    for (std::size_t i = 0; i + 1 < s.x.size(); ++i) {
      cv::line(img, {px(s.x[i]), map_y(s.y[i])}, {px(s.x[i + 1]), map_y(s.y[i + 1])}, color, 2,
               cv::LINE_AA);
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      cv::circle(img, {px(s.x[i]), map_y(s.y[i])}, 4, color, cv::FILLED, cv::LINE_AA);
    }
    if (legend && !s.label.empty()) {
      cv::line(img, {width - right - 220, legend_y}, {width - right - 190, legend_y}, color, 3);
      cv::putText(img, s.label, {width - right - 180, legend_y + 5}, font, 0.5, axis_color, 1,
                  cv::LINE_AA);
      legend_y += 24;
    }
  };
  for (const auto& s : spec.series) draw(s, py);
  for (const auto& s : spec.series2) draw(s, py2);
  return img;
}

}  // namespace detail

/// Writes two charts per architecture into `out_dir`, each PNG paired with a
/// CSV of its underlying points: a depth scan (validation accuracy on the
/// left axis, trainable parameters on the right) and the best rung's
/// training/validation accuracy curves. Architectures with no successful
/// rungs are skipped with a warning.
inline PlotResult write_plots(std::span<const RunRecord> records,
                              const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  PlotResult result;

  std::map<std::string, std::vector<RunRecord>> by_arch;
  for (const auto& r : records) {
    if (r.status == "ok") by_arch[r.architecture].push_back(r);
    else by_arch[r.architecture];  // keep the key so empty archs warn
  }

  for (auto& [arch, runs] : by_arch) {
    if (runs.empty()) {
      result.warnings.push_back("architecture " + arch + ": no successful rungs, plots skipped");
      continue;
    }
    std::sort(runs.begin(), runs.end(),
              [](const RunRecord& a, const RunRecord& b) { return a.depth < b.depth; });

    {
      detail::ChartSpec spec;
      spec.title = arch + ": accuracy and tuned parameters by unfrozen depth";
      spec.x_label = "unfrozen layers";
      spec.y_label = "val accuracy";
      spec.y2_label = "trainable params";
      detail::Series acc{"val accuracy", {}, {}};
      detail::Series params{"trainable params", {}, {}};
      for (const auto& r : runs) {
        acc.x.push_back(static_cast<double>(r.depth));
        acc.y.push_back(r.best_val_accuracy);
        params.x.push_back(static_cast<double>(r.depth));
        params.y.push_back(static_cast<double>(r.trainable_params));
      }
      spec.series.push_back(std::move(acc));
      spec.series2.push_back(std::move(params));
      const cv::Mat img = detail::line_chart(spec);
      const auto png = out_dir / (arch + "_depth_scan.png");
      if (!cv::imwrite(png.string(), img)) throw IoError("cannot write " + png.string());
      result.written.push_back(png);

      const auto csv = out_dir / (arch + "_depth_scan.csv");
      std::ofstream out(csv);
      if (!out) throw IoError("cannot write " + csv.string());
      out << "depth,val_accuracy,trainable_params\n";
      for (const auto& r : runs) {
        out << r.depth << ',' << r.best_val_accuracy << ',' << r.trainable_params << '\n';
      }
      result.written.push_back(csv);
    }

    {
      const RunRecord* best = &runs.front();
      for (const auto& r : runs) {
        if (r.best_val_accuracy > best->best_val_accuracy) best = &r;
      }
      detail::ChartSpec spec;
      spec.title = arch + ": training curves at depth " + std::to_string(best->depth);
      spec.x_label = "epoch";
      spec.y_label = "accuracy";
      detail::Series train{"train", {}, {}};
      detail::Series val{"validation", {}, {}};
      for (const auto& e : best->history) {
        train.x.push_back(static_cast<double>(e.epoch));
        train.y.push_back(e.train_accuracy);
        val.x.push_back(static_cast<double>(e.epoch));
        val.y.push_back(e.val_accuracy);
      }
      spec.series.push_back(std::move(train));
      spec.series.push_back(std::move(val));
      const cv::Mat img = detail::line_chart(spec);
      const auto png = out_dir / (arch + "_curves.png");
      if (!cv::imwrite(png.string(), img)) throw IoError("cannot write " + png.string());
      result.written.push_back(png);

      const auto csv = out_dir / (arch + "_curves.csv");
      std::ofstream out(csv);
      if (!out) throw IoError("cannot write " + csv.string());
      out << "depth,epoch,train_accuracy,val_accuracy\n";
      for (const auto& e : best->history) {
        out << best->depth << ',' << e.epoch << ',' << e.train_accuracy << ',' << e.val_accuracy
            << '\n';
      }
      result.written.push_back(csv);
    }
  }
  return result;
}

}  // namespace ftsweep
