#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ftsweep/errors.hpp"
#include "ftsweep/metrics.hpp"
#include "ftsweep/trainer.hpp"

namespace ftsweep {

/// Everything recorded for one rung of a sweep. Ratio fields hold the raw
/// quotients; display truncation happens at report time.
struct RunRecord {
  std::string architecture;
  std::size_t depth = 0;
  std::string config_hash;
  std::string status = "ok";  // "ok" or "failed"
  std::string error;
  std::uint64_t seed = 0;
  std::size_t trainable_layers = 0;
  std::size_t trainable_params = 0;
  std::size_t total_params = 0;
  std::size_t total_layers = 0;
  double layer_ratio = 0.0;
  double param_ratio = 0.0;
  double best_val_accuracy = 0.0;
  std::size_t best_epoch = 0;
  Confusion confusion{};
  std::vector<EpochRecord> history;
  double wall_seconds = 0.0;
  std::string init_hash;

  std::string key() const {
    return architecture + "|" + std::to_string(depth) + "|" + config_hash;
  }
};

inline nlohmann::ordered_json to_json(const RunRecord& r) {
  nlohmann::ordered_json j;
  j["architecture"] = r.architecture;
  j["depth"] = r.depth;
  j["config_hash"] = r.config_hash;
  j["status"] = r.status;
  if (!r.error.empty()) j["error"] = r.error;
  j["seed"] = r.seed;
  j["trainable_layers"] = r.trainable_layers;
  j["trainable_params"] = r.trainable_params;
  j["total_params"] = r.total_params;
  j["total_layers"] = r.total_layers;
  j["layer_ratio"] = r.layer_ratio;
  j["param_ratio"] = r.param_ratio;
  j["best_val_accuracy"] = r.best_val_accuracy;
  j["best_epoch"] = r.best_epoch;
  nlohmann::ordered_json conf = nlohmann::ordered_json::array();
  for (const auto& row : r.confusion) {
    conf.push_back(std::vector<std::size_t>(row.begin(), row.end()));
  }
  j["confusion"] = std::move(conf);
  nlohmann::ordered_json hist = nlohmann::ordered_json::array();
  for (const auto& e : r.history) {
    nlohmann::ordered_json h;
    h["epoch"] = e.epoch;
    h["train_loss"] = e.train_loss;
    h["train_accuracy"] = e.train_accuracy;
    h["val_loss"] = e.val_loss;
    h["val_accuracy"] = e.val_accuracy;
    hist.push_back(std::move(h));
  }
  j["history"] = std::move(hist);
  j["wall_seconds"] = r.wall_seconds;
  j["init_hash"] = r.init_hash;
  return j;
}

inline RunRecord run_record_from_json(const nlohmann::json& j) {
  RunRecord r;
  r.architecture = j.at("architecture").get<std::string>();
  r.depth = j.at("depth").get<std::size_t>();
  r.config_hash = j.at("config_hash").get<std::string>();
  r.status = j.at("status").get<std::string>();
  if (j.contains("error")) r.error = j.at("error").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.trainable_layers = j.at("trainable_layers").get<std::size_t>();
  r.trainable_params = j.at("trainable_params").get<std::size_t>();
  r.total_params = j.at("total_params").get<std::size_t>();
  r.total_layers = j.at("total_layers").get<std::size_t>();
  r.layer_ratio = j.at("layer_ratio").get<double>();
  r.param_ratio = j.at("param_ratio").get<double>();
  r.best_val_accuracy = j.at("best_val_accuracy").get<double>();
  r.best_epoch = j.at("best_epoch").get<std::size_t>();
  const auto& conf = j.at("confusion");
  for (std::size_t a = 0; a < kNumClasses; ++a) {
    for (std::size_t b = 0; b < kNumClasses; ++b) {
      r.confusion[a][b] = conf.at(a).at(b).get<std::size_t>();
    }
  }
  for (const auto& h : j.at("history")) {
    EpochRecord e;
    e.epoch = h.at("epoch").get<std::size_t>();
    e.train_loss = h.at("train_loss").get<double>();
    e.train_accuracy = h.at("train_accuracy").get<double>();
    e.val_loss = h.at("val_loss").get<double>();
    e.val_accuracy = h.at("val_accuracy").get<double>();
    r.history.push_back(e);
  }
  r.wall_seconds = j.at("wall_seconds").get<double>();
  r.init_hash = j.at("init_hash").get<std::string>();
  return r;
}

/// Append-only JSON-lines persistence for run records. A record is one line;
/// reloading keeps the newest record per (architecture, depth, config) key.
/// Unparsable lines are skipped and reported, never fatal.
class RunStore {
 public:
  struct LoadReport {
    std::size_t lines = 0;
    std::size_t corrupted = 0;
    std::vector<std::string> warnings;
  };

  explicit RunStore(std::filesystem::path path) : path_(std::move(path)) {}

  const std::filesystem::path& path() const { return path_; }
  bool exists() const { return std::filesystem::exists(path_); }

  void append(const RunRecord& record) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::ofstream out(path_, std::ios::app);
    if (!out) throw IoError("cannot open run store " + path_.string());
    out << to_json(record).dump() << '\n';
    out.flush();
    if (!out) throw IoError("short write on run store " + path_.string());
  }

  std::vector<RunRecord> load(LoadReport* report = nullptr) const {
    LoadReport local;
    LoadReport& rep = report != nullptr ? *report : local;
    rep = LoadReport{};

    std::vector<RunRecord> ordered;
    std::map<std::string, std::size_t> by_key;  // key -> index in ordered
    if (!exists()) return ordered;

    std::ifstream in(path_);
    if (!in) throw IoError("cannot read run store " + path_.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      rep.lines++;
      RunRecord record;
      try {
        record = run_record_from_json(nlohmann::json::parse(line));
      } catch (const std::exception& e) {
        rep.corrupted++;
        rep.warnings.push_back("line " + std::to_string(line_no) + ": " + e.what());
        continue;
      }
      const std::string key = record.key();
      auto it = by_key.find(key);
      if (it == by_key.end()) {
        by_key.emplace(key, ordered.size());
        ordered.push_back(std::move(record));
      } else {
        ordered[it->second] = std::move(record);  // newest wins, position stays
      }
    }
    return ordered;
  }

 private:
  std::filesystem::path path_;
};

}  // namespace ftsweep
