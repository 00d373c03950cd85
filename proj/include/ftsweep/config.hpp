#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "ftsweep/catalog.hpp"
#include "ftsweep/cutout.hpp"
#include "ftsweep/errors.hpp"
#include "ftsweep/synthetic.hpp"
#include "ftsweep/toml.hpp"
#include "ftsweep/trainer.hpp"

namespace ftsweep {

/// Where samples come from and how they are split.
struct DataConfig {
  std::string source = "synthetic";  // "synthetic" or "catalog"
  std::filesystem::path catalog;
  std::filesystem::path cache_dir = "cache";
  std::string endpoint;
  std::size_t image_size = 512;
  std::size_t download_size = 2048;
  double cutout_scale = 0.1;
  int fetch_retries = 3;
  int fetch_timeout_seconds = 30;
  std::size_t fetch_workers = 4;
  std::size_t subset = 0;      // keep only the first N catalog rows; 0 keeps all
  bool random_subset = false;  // sample the subset with split_seed instead
  double train_fraction = 0.7;
  std::uint64_t split_seed = 42;
  SyntheticSpec synthetic;

  CutoutParams cutout_params() const {
    CutoutParams p;
    p.scale = cutout_scale;
    p.width = download_size;
    p.height = download_size;
    p.endpoint = endpoint;
    p.retries = fetch_retries;
    p.timeout_seconds = fetch_timeout_seconds;
    return p;
  }
};

struct WeightsConfig {
  std::filesystem::path dir = "weights";
  bool pretrained = false;
};

struct SweepConfig {
  std::vector<std::string> architectures;
  std::vector<std::size_t> schedule;  // shared override; empty keeps per-arch defaults
  std::string trainer = "native";     // "native" or "mock"
  std::filesystem::path output_dir = "runs";
};

struct AnalysisConfig {
  double dip_delta = 0.015;
  double near_peak_eps = 0.15;
  std::filesystem::path report_dir;  // empty: <output_dir>/report
};

struct AppConfig {
  DataConfig data;
  WeightsConfig weights;
  SweepConfig sweep;
  TrainConfig train;
  AnalysisConfig analysis;

  std::filesystem::path store_path() const { return sweep.output_dir / "runs.jsonl"; }
  std::filesystem::path manifest_path() const { return sweep.output_dir / "manifest.json"; }
  std::filesystem::path report_dir() const {
    return analysis.report_dir.empty() ? sweep.output_dir / "report" : analysis.report_dir;
  }
};

namespace detail {

/// Typed reads over one section with unknown-key detection.
class SectionReader {
 public:
  SectionReader(const toml::Document& doc, std::string name)
      : table_(doc.section(name)), name_(std::move(name)) {}

  std::string get_string(const std::string& key, std::string fallback) {
    const toml::Value* v = find(key);
    return v == nullptr ? fallback : v->as_string();
  }

  bool get_bool(const std::string& key, bool fallback) {
    const toml::Value* v = find(key);
    return v == nullptr ? fallback : v->as_bool();
  }

  double get_double(const std::string& key, double fallback) {
    const toml::Value* v = find(key);
    return v == nullptr ? fallback : v->as_double();
  }

  std::size_t get_size(const std::string& key, std::size_t fallback) {
    const toml::Value* v = find(key);
    if (v == nullptr) return fallback;
    const std::int64_t n = v->as_int();
    if (n < 0) fail(key, "must not be negative");
    return static_cast<std::size_t>(n);
  }

  int get_int(const std::string& key, int fallback) {
    const toml::Value* v = find(key);
    return v == nullptr ? fallback : static_cast<int>(v->as_int());
  }

  std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) {
    const toml::Value* v = find(key);
    if (v == nullptr) return fallback;
    const std::int64_t n = v->as_int();
    if (n < 0) fail(key, "must not be negative");
    return static_cast<std::uint64_t>(n);
  }

  std::vector<std::string> get_strings(const std::string& key) {
    const toml::Value* v = find(key);
    std::vector<std::string> out;
    if (v == nullptr) return out;
    for (const auto& item : v->as_array()) out.push_back(item.as_string());
    return out;
  }

  std::vector<std::size_t> get_sizes(const std::string& key) {
    const toml::Value* v = find(key);
    std::vector<std::size_t> out;
    if (v == nullptr) return out;
    for (const auto& item : v->as_array()) {
      const std::int64_t n = item.as_int();
      if (n < 0) fail(key, "entries must not be negative");
      out.push_back(static_cast<std::size_t>(n));
    }
    return out;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    throw ConfigError("[" + name_ + "] " + key + " " + message);
  }

  void finish() const {
    for (const auto& [key, value] : table_) {
      if (used_.count(key) == 0) {
        throw ConfigError("unknown key '" + key + "' in [" + name_ + "]");
      }
    }
  }

 private:
  const toml::Value* find(const std::string& key) {
    used_.insert(key);
    auto it = table_.find(key);
    return it == table_.end() ? nullptr : &it->second;
  }

  const toml::Table& table_;
  std::string name_;
  std::set<std::string> used_;
};

}  // namespace detail

/// Builds the full configuration from a parsed document, rejecting unknown
/// sections and keys and validating value ranges.
inline AppConfig config_from_document(const toml::Document& doc) {
  static const std::set<std::string> known_sections = {"data", "weights", "sweep", "train",
                                                       "analysis"};
  for (const auto& [name, table] : doc.sections) {
    if (name.empty()) {
      if (!table.empty()) {
        throw ConfigError("key '" + table.begin()->first + "' appears before any [section]");
      }
      continue;
    }
    if (known_sections.count(name) == 0) throw ConfigError("unknown section [" + name + "]");
  }

  AppConfig cfg;

  {
    detail::SectionReader s(doc, "data");
    cfg.data.source = s.get_string("source", cfg.data.source);
    if (cfg.data.source != "synthetic" && cfg.data.source != "catalog") {
      s.fail("source", "must be \"synthetic\" or \"catalog\"");
    }
    cfg.data.catalog = s.get_string("catalog", {});
    cfg.data.cache_dir = s.get_string("cache_dir", cfg.data.cache_dir.string());
    cfg.data.endpoint = s.get_string("endpoint", {});
    cfg.data.image_size = s.get_size("image_size", cfg.data.image_size);
    if (cfg.data.image_size == 0) s.fail("image_size", "must be positive");
    cfg.data.download_size = s.get_size("download_size", cfg.data.download_size);
    if (cfg.data.download_size == 0) s.fail("download_size", "must be positive");
    cfg.data.cutout_scale = s.get_double("cutout_scale", cfg.data.cutout_scale);
    if (cfg.data.cutout_scale <= 0) s.fail("cutout_scale", "must be positive");
    cfg.data.fetch_retries = s.get_int("fetch_retries", cfg.data.fetch_retries);
    if (cfg.data.fetch_retries < 0) s.fail("fetch_retries", "must not be negative");
    cfg.data.fetch_timeout_seconds =
        s.get_int("fetch_timeout_seconds", cfg.data.fetch_timeout_seconds);
    if (cfg.data.fetch_timeout_seconds <= 0) s.fail("fetch_timeout_seconds", "must be positive");
    cfg.data.fetch_workers = s.get_size("fetch_workers", cfg.data.fetch_workers);
    if (cfg.data.fetch_workers == 0) s.fail("fetch_workers", "must be positive");
    cfg.data.subset = s.get_size("subset", cfg.data.subset);
    cfg.data.random_subset = s.get_bool("random_subset", cfg.data.random_subset);
    cfg.data.train_fraction = s.get_double("train_fraction", cfg.data.train_fraction);
    if (cfg.data.train_fraction <= 0.0 || cfg.data.train_fraction >= 1.0) {
      s.fail("train_fraction", "must be strictly between 0 and 1");
    }
    cfg.data.split_seed = s.get_seed("split_seed", cfg.data.split_seed);
    cfg.data.synthetic.image_size = s.get_size("synthetic_size", cfg.data.synthetic.image_size);
    if (cfg.data.synthetic.image_size < 16) s.fail("synthetic_size", "must be at least 16");
    const auto counts = s.get_sizes("synthetic_counts");
    if (!counts.empty()) {
      if (counts.size() != kNumClasses) s.fail("synthetic_counts", "needs exactly 3 entries");
      for (std::size_t c = 0; c < kNumClasses; ++c) {
        if (counts[c] == 0) s.fail("synthetic_counts", "entries must be positive");
        cfg.data.synthetic.counts[c] = counts[c];
      }
    }
    cfg.data.synthetic.noise = s.get_double("synthetic_noise", cfg.data.synthetic.noise);
    cfg.data.synthetic.seed = s.get_seed("synthetic_seed", cfg.data.synthetic.seed);
    if (cfg.data.source == "catalog" && cfg.data.catalog.empty()) {
      s.fail("catalog", "is required when source = \"catalog\"");
    }
    s.finish();
  }

  {
    detail::SectionReader s(doc, "weights");
    cfg.weights.dir = s.get_string("dir", cfg.weights.dir.string());
    cfg.weights.pretrained = s.get_bool("pretrained", cfg.weights.pretrained);
    s.finish();
  }

  {
    detail::SectionReader s(doc, "sweep");
    cfg.sweep.architectures = s.get_strings("architectures");
    cfg.sweep.schedule = s.get_sizes("schedule");
    cfg.sweep.trainer = s.get_string("trainer", cfg.sweep.trainer);
    if (cfg.sweep.trainer != "native" && cfg.sweep.trainer != "mock") {
      s.fail("trainer", "must be \"native\" or \"mock\"");
    }
    cfg.sweep.output_dir = s.get_string("output_dir", cfg.sweep.output_dir.string());
    s.finish();
  }

  {
    detail::SectionReader s(doc, "train");
    cfg.train.optimizer = s.get_string("optimizer", cfg.train.optimizer);
    if (cfg.train.optimizer != "adam" && cfg.train.optimizer != "sgd") {
      s.fail("optimizer", "must be \"adam\" or \"sgd\"");
    }
    cfg.train.learning_rate = s.get_double("learning_rate", cfg.train.learning_rate);
    if (cfg.train.learning_rate <= 0) s.fail("learning_rate", "must be positive");
    cfg.train.epochs = s.get_size("epochs", cfg.train.epochs);
    if (cfg.train.epochs == 0) s.fail("epochs", "must be at least 1");
    cfg.train.batch_size = s.get_size("batch_size", cfg.train.batch_size);
    if (cfg.train.batch_size == 0) s.fail("batch_size", "must be at least 1");
    cfg.train.early_stopping = s.get_bool("early_stopping", cfg.train.early_stopping);
    cfg.train.patience = s.get_size("patience", cfg.train.patience);
    cfg.train.seed = s.get_seed("seed", cfg.train.seed);
    const std::string scheme = s.get_string(
        "class_weights",
        cfg.train.weight_scheme == WeightScheme::kInverseFrequency ? "inverse_frequency" : "none");
    const auto parsed_scheme = parse_weight_scheme(scheme);
    if (!parsed_scheme) s.fail("class_weights", "must be \"inverse_frequency\" or \"none\"");
    cfg.train.weight_scheme = *parsed_scheme;
    s.finish();
  }

  {
    detail::SectionReader s(doc, "analysis");
    cfg.analysis.dip_delta = s.get_double("dip_delta", cfg.analysis.dip_delta);
    if (cfg.analysis.dip_delta <= 0) s.fail("dip_delta", "must be positive");
    cfg.analysis.near_peak_eps = s.get_double("near_peak_eps", cfg.analysis.near_peak_eps);
    if (cfg.analysis.near_peak_eps < 0 || cfg.analysis.near_peak_eps >= 1) {
      s.fail("near_peak_eps", "must be in [0, 1)");
    }
    cfg.analysis.report_dir = s.get_string("report_dir", {});
    s.finish();
  }

  return cfg;
}

inline AppConfig load_config(const std::filesystem::path& path) {
  return config_from_document(toml::parse_file(path));
}

}  // namespace ftsweep
