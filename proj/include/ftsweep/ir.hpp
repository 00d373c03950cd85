#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ftsweep/hash.hpp"

namespace ftsweep {

/// One entry in a model's flattened layer list. `param_count` covers every
/// variable the layer owns; `trainable_param_count` covers only the variables
/// an optimizer would update when the layer is unfrozen (batch-norm moving
/// statistics are counted by the former but not the latter).
struct LayerSpec {
  std::size_t index = 0;
  std::string name;
  std::string kind;
  std::size_t param_count = 0;
  std::size_t trainable_param_count = 0;
  bool trainable = true;
};

/// Flattened view of a classifier: an ordered backbone layer list plus a
/// classification head. Depth arithmetic runs over the backbone only; the
/// head stays trainable at every depth.
struct ModelIR {
  std::string architecture;
  std::vector<LayerSpec> backbone;
  LayerSpec head;
  std::size_t feature_dim = 0;
  std::size_t input_size = 0;
  std::size_t num_classes = 0;

  std::size_t backbone_depth() const { return backbone.size(); }

  std::size_t total_params() const {
    std::size_t total = head.param_count;
    for (const auto& l : backbone) total += l.param_count;
    return total;
  }

  std::size_t total_layers() const { return backbone.size() + 1; }

  /// Digest over the structural identity: names, kinds, counts, order.
  /// Trainability flags are excluded so a freeze plan can be validated
  /// against the model it was derived from regardless of current state.
  std::string structure_hash() const {
    Sha256Stream s;
    s.update(architecture);
    s.update("|");
    for (const auto& l : backbone) {
      s.update(l.name);
      s.update(":");
      s.update(l.kind);
      s.update(":");
      s.update(std::to_string(l.param_count));
      s.update(":");
      s.update(std::to_string(l.trainable_param_count));
      s.update(";");
    }
    s.update("head=");
    s.update(head.name);
    s.update(":");
    s.update(std::to_string(head.param_count));
    return s.hex();
  }
};

/// Static facts about a supported backbone.
///
/// `reference_params` is the widely published parameter total for the
/// architecture with a small classification head attached; framework
/// enumeration drift is tolerated up to 1%, so it serves as a cross-check
/// rather than an exact target. `preprocess_mode` names the input
/// normalization convention the pretrained weights expect ("caffe", "tf",
/// "torch", or "none" for models with a built-in rescaling layer).
struct ArchDescriptor {
  std::string name;
  std::string preprocess_mode = "none";
  std::size_t input_size = 0;
  std::size_t feature_dim = 0;
  std::size_t backbone_layers = 0;   // flattened layer count without the head
  std::size_t backbone_params = 0;   // pretrained backbone parameter total
  std::size_t reference_params = 0;  // published total, 0 when none exists
  std::vector<std::size_t> depth_schedule;

  std::size_t total_layers() const { return backbone_layers + 2; }  // + pooling + classifier
  std::size_t head_params(std::size_t num_classes = 3) const {
    return feature_dim * num_classes + num_classes;
  }
  std::size_t total_params(std::size_t num_classes = 3) const {
    return backbone_params + head_params(num_classes);
  }
};

}  // namespace ftsweep
