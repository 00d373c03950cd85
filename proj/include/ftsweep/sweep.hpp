#pragma once

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ftsweep/errors.hpp"
#include "ftsweep/freeze.hpp"
#include "ftsweep/registry.hpp"
#include "ftsweep/store.hpp"
#include "ftsweep/trainer.hpp"

namespace ftsweep {

struct SweepRequest {
  std::vector<std::string> architectures;
  std::vector<std::size_t> schedule;  // shared override; empty: per-arch registry default
  TrainConfig train;
  bool pretrained = false;
  std::filesystem::path weights_dir;
  bool resume = false;
  std::filesystem::path store_path;
  std::filesystem::path manifest_path;  // defaults to manifest.json next to the store
};

struct SweepSummary {
  std::size_t planned = 0;
  std::size_t executed = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
  std::vector<RunRecord> records;  // one per rung, request order
};

namespace detail {

inline std::filesystem::path manifest_path_for(const SweepRequest& req) {
  if (!req.manifest_path.empty()) return req.manifest_path;
  auto p = req.store_path;
  p.replace_filename("manifest.json");
  return p;
}

/// Resolves and validates one architecture's ladder: starts at 0, strictly
/// increasing, capped by the backbone layer count.
inline std::vector<std::size_t> resolve_schedule(const SweepRequest& req,
                                                 const ArchDescriptor& desc) {
  const std::vector<std::size_t>& schedule =
      req.schedule.empty() ? desc.depth_schedule : req.schedule;
  if (schedule.empty()) throw ConfigError("depth schedule for " + desc.name + " is empty");
  if (schedule.front() != 0) {
    throw ConfigError("depth schedule for " + desc.name + " must start at 0");
  }
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    if (schedule[i] <= schedule[i - 1]) {
      throw ConfigError("depth schedule for " + desc.name + " must be strictly increasing");
    }
  }
  if (schedule.back() > desc.backbone_layers) {
    throw DepthOutOfRangeError("depth " + std::to_string(schedule.back()) + " exceeds the " +
                               std::to_string(desc.backbone_layers) + " backbone layers of " +
                               desc.name);
  }
  return schedule;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Order-sensitive digest of sample identities and labels; pixel payloads are
/// already pinned by the preprocessing determinism tests.
inline std::string dataset_fingerprint(const Dataset& data) {
  Sha256Stream s;
  for (const auto& sample : data) {
    s.update(sample.object_id);
    s.update("|");
    s.update(std::to_string(static_cast<int>(sample.label)));
    s.update("\n");
  }
  return s.hex();
}

inline nlohmann::ordered_json sweep_manifest(const SweepRequest& req,
                                             const std::vector<std::string>& archs,
                                             const std::vector<std::vector<std::size_t>>& schedules,
                                             const std::string& trainer_kind,
                                             const Dataset& train_set, const Dataset& val_set) {
  nlohmann::ordered_json j;
  j["manifest_id"] = req.train.hash();
  j["created_at"] = utc_timestamp();
  j["trainer"] = trainer_kind;
  j["pretrained"] = req.pretrained;
  j["seed"] = req.train.seed;
  j["config"] = req.train.canonical();
  j["config_hash"] = req.train.hash();
  j["architectures"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < archs.size(); ++i) {
    nlohmann::ordered_json a;
    a["name"] = archs[i];
    a["schedule"] = schedules[i];
    j["architectures"].push_back(std::move(a));
  }
  j["data"]["train_samples"] = train_set.size();
  j["data"]["val_samples"] = val_set.size();
  j["data"]["train_fingerprint"] = dataset_fingerprint(train_set);
  j["data"]["val_fingerprint"] = dataset_fingerprint(val_set);
  j["environment"]["compiler"] = __VERSION__;
  j["environment"]["pointer_bits"] = sizeof(void*) * 8;
  return j;
}

/// Test hook: stretches each rung so an outside observer can interrupt
/// between appends.
inline void rung_delay() {
  if (const char* ms = std::getenv("FTSWEEP_RUNG_DELAY_MS"); ms != nullptr) {
    const long v = std::strtol(ms, nullptr, 10);
    if (v > 0) std::this_thread::sleep_for(std::chrono::milliseconds(v));
  }
}

}  // namespace detail

/// Runs the depth ladder of every requested architecture against one shared
/// dataset and one results store. Each rung starts from a freshly initialized
/// model, applies its freeze plan, trains, and appends a record to the store
/// before the next rung begins. A rung that fails is recorded as failed and
/// the sweep moves on. With `resume`, rungs that already have a successful
/// record under the same config are skipped; failed ones rerun. The manifest
/// is written before any rung trains.
inline SweepSummary run_sweep(const SweepRequest& req, Trainer& trainer, const Dataset& train_set,
                              const Dataset& val_set) {
  if (req.architectures.empty()) throw ConfigError("no architectures requested");
  const auto& registry = BackboneRegistry::instance();

  std::vector<std::vector<std::size_t>> schedules;
  for (const auto& arch : req.architectures) {
    schedules.push_back(detail::resolve_schedule(req, registry.describe(arch)));
  }

  RunStore store(req.store_path);
  const std::string config_hash = req.train.hash();
  const auto manifest_path = detail::manifest_path_for(req);

  if (store.exists() && !req.resume) {
    throw ConfigError("run store " + req.store_path.string() +
                      " already exists; resume to continue it");
  }

  std::set<std::string> done;
  if (req.resume && store.exists()) {
    if (std::filesystem::exists(manifest_path)) {
      std::ifstream in(manifest_path);
      nlohmann::json existing;
      try {
        in >> existing;
      } catch (const std::exception& e) {
        throw ConfigError("unreadable sweep manifest " + manifest_path.string() + ": " + e.what());
      }
      if (existing.value("config_hash", "") != config_hash) {
        throw ConfigError("sweep manifest " + manifest_path.string() +
                          " was written under a different configuration");
      }
    }
    for (const auto& r : store.load()) {
      if (r.status == "ok" && r.config_hash == config_hash) done.insert(r.key());
    }
  }

  const auto manifest = detail::sweep_manifest(req, req.architectures, schedules, trainer.kind(),
                                               train_set, val_set);
  if (manifest_path.has_parent_path()) {
    std::filesystem::create_directories(manifest_path.parent_path());
  }
  {
    std::ofstream out(manifest_path);
    if (!out) throw IoError("cannot write sweep manifest " + manifest_path.string());
    out << manifest.dump(2) << '\n';
  }

  const auto persisted = store.load();
  SweepSummary summary;
  for (const auto& schedule : schedules) summary.planned += schedule.size();

  for (std::size_t a = 0; a < req.architectures.size(); ++a) {
    const std::string& arch = req.architectures[a];
    for (const std::size_t depth : schedules[a]) {
      RunRecord record;
      record.architecture = arch;
      record.depth = depth;
      record.config_hash = config_hash;
      record.seed = req.train.seed;

      if (done.count(record.key()) > 0) {
        summary.skipped++;
        for (const auto& r : persisted) {
          if (r.key() == record.key()) {
            summary.records.push_back(r);
            break;
          }
        }
        continue;
      }

      detail::rung_delay();

      LoadOptions load;
      load.seed = req.train.seed;
      load.pretrained = req.pretrained;
      load.weights_dir = req.weights_dir;
      auto model = registry.load(arch, load);
      record.init_hash = model_state_hash(*model);

      const FreezePlan plan = make_freeze_plan(model->ir(), depth);
      apply_freeze_plan(*model, plan);
      const TuningRatios ratios = tuning_ratios(plan, model->ir());
      record.trainable_layers = plan.trainable_layers;
      record.trainable_params = plan.trainable_params;
      record.total_params = plan.total_params;
      record.total_layers = model->ir().total_layers() + 1;  // backbone + pooling + head
      record.layer_ratio = ratios.layer_ratio;
      record.param_ratio = ratios.param_ratio;

      try {
        const TrainOutcome outcome = trainer.train(*model, train_set, val_set, req.train);
        record.status = "ok";
        record.best_val_accuracy = outcome.best_val_accuracy;
        record.best_epoch = outcome.best_epoch;
        record.confusion = outcome.confusion;
        record.history = outcome.history;
        record.wall_seconds = outcome.wall_seconds;
      } catch (const std::bad_alloc&) {
        record.status = "failed";
        record.error = "out of memory";
        summary.failed++;
      } catch (const Error& e) {
        record.status = "failed";
        record.error = e.what();
        summary.failed++;
      }

      store.append(record);
      summary.executed++;
      summary.records.push_back(std::move(record));
    }
  }
  return summary;
}

}  // namespace ftsweep
