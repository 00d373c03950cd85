#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "ftsweep/errors.hpp"
#include "ftsweep/ir.hpp"
#include "ftsweep/model.hpp"

namespace ftsweep {

/// Trainability assignment for one rung of a depth sweep: the last `depth`
/// backbone layers are unfrozen, everything earlier is frozen, and the head
/// is always trainable. Parameter totals use optimizer-visible counts for
/// the trainable side, so `trainable_params + frozen_params == total_params`
/// with batch-norm moving statistics landing on the frozen side.
struct FreezePlan {
  std::string architecture;
  std::size_t depth = 0;
  std::string structure_hash;
  std::vector<bool> layer_trainable;
  std::size_t trainable_layers = 0;  // backbone layers unfrozen; head not counted
  std::size_t trainable_params = 0;  // includes the head
  std::size_t frozen_params = 0;
  std::size_t total_params = 0;
};

inline FreezePlan make_freeze_plan(const ModelIR& ir, std::size_t depth) {
  const std::size_t n = ir.backbone.size();
  if (depth > n) {
    throw DepthOutOfRangeError("depth " + std::to_string(depth) + " exceeds the " +
                               std::to_string(n) + " backbone layers of " + ir.architecture);
  }
  FreezePlan plan;
  plan.architecture = ir.architecture;
  plan.depth = depth;
  plan.structure_hash = ir.structure_hash();
  plan.layer_trainable.assign(n, false);
  plan.total_params = ir.total_params();
  plan.trainable_params = ir.head.param_count;
  for (std::size_t i = n - depth; i < n; ++i) {
    plan.layer_trainable[i] = true;
    plan.trainable_params += ir.backbone[i].trainable_param_count;
  }
  plan.trainable_layers = depth;
  plan.frozen_params = plan.total_params - plan.trainable_params;
  return plan;
}

/// Applies the plan to a model built from the same structure. A plan derived
/// from a different architecture or layer list is rejected.
inline void apply_freeze_plan(Model& model, const FreezePlan& plan) {
  const ModelIR& ir = model.ir();
  if (plan.architecture != ir.architecture) {
    throw PlanMismatchError("freeze plan is for '" + plan.architecture + "', model is '" +
                            ir.architecture + "'");
  }
  if (plan.structure_hash != ir.structure_hash()) {
    throw PlanMismatchError("freeze plan was derived from a different '" + plan.architecture +
                            "' layer list");
  }
  if (plan.layer_trainable.size() != ir.backbone.size()) {
    throw PlanMismatchError("freeze plan covers " + std::to_string(plan.layer_trainable.size()) +
                            " layers, model has " + std::to_string(ir.backbone.size()));
  }
  for (std::size_t i = 0; i < plan.layer_trainable.size(); ++i) {
    model.set_layer_trainable(i, plan.layer_trainable[i]);
  }
}

/// Fraction of the network being tuned, on the layer axis and the parameter
/// axis. Layer totals count the backbone plus pooling and head (the published
/// convention); the unfrozen count covers backbone layers only.
struct TuningRatios {
  double layer_ratio = 0.0;
  double param_ratio = 0.0;
};

inline TuningRatios tuning_ratios(std::size_t trainable_layers, std::size_t total_layers,
                                  std::size_t trainable_params, std::size_t total_params) {
  if (total_layers == 0 || total_params == 0) {
    throw Error("tuning ratios need nonzero totals");
  }
  TuningRatios r;
  r.layer_ratio = static_cast<double>(trainable_layers) / static_cast<double>(total_layers);
  r.param_ratio = static_cast<double>(trainable_params) / static_cast<double>(total_params);
  return r;
}

inline TuningRatios tuning_ratios(const FreezePlan& plan, const ModelIR& ir) {
  return tuning_ratios(plan.trainable_layers, ir.total_layers() + 1, plan.trainable_params,
                       plan.total_params);
}

/// Display rule for ratio cells: truncate toward zero at two decimals,
/// so 0.379 renders as 0.37, never 0.38.
inline double truncate2(double x) {
  return std::floor(x * 100.0 + 1e-9) / 100.0;
}

inline std::string format_ratio(double x) {
  const double t = truncate2(x);
  const long scaled = std::lround(t * 100.0);
  std::string out = std::to_string(scaled / 100) + ".";
  out += static_cast<char>('0' + (scaled / 10) % 10);
  out += static_cast<char>('0' + scaled % 10);
  return out;
}

inline nlohmann::ordered_json to_json(const FreezePlan& plan) {
  nlohmann::ordered_json j;
  j["architecture"] = plan.architecture;
  j["depth"] = plan.depth;
  j["structure_hash"] = plan.structure_hash;
  j["trainable_layers"] = plan.trainable_layers;
  j["trainable_params"] = plan.trainable_params;
  j["frozen_params"] = plan.frozen_params;
  j["total_params"] = plan.total_params;
  std::vector<int> flags(plan.layer_trainable.begin(), plan.layer_trainable.end());
  j["layer_trainable"] = flags;
  return j;
}

inline FreezePlan freeze_plan_from_json(const nlohmann::json& j) {
  FreezePlan plan;
  plan.architecture = j.at("architecture").get<std::string>();
  plan.depth = j.at("depth").get<std::size_t>();
  plan.structure_hash = j.at("structure_hash").get<std::string>();
  plan.trainable_layers = j.at("trainable_layers").get<std::size_t>();
  plan.trainable_params = j.at("trainable_params").get<std::size_t>();
  plan.frozen_params = j.at("frozen_params").get<std::size_t>();
  plan.total_params = j.at("total_params").get<std::size_t>();
  const auto flags = j.at("layer_trainable").get<std::vector<int>>();
  plan.layer_trainable.assign(flags.size(), false);
  for (std::size_t i = 0; i < flags.size(); ++i) plan.layer_trainable[i] = flags[i] != 0;
  return plan;
}

}  // namespace ftsweep
