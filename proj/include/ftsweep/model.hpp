#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ftsweep/errors.hpp"
#include "ftsweep/hash.hpp"
#include "ftsweep/ir.hpp"
#include "ftsweep/nn.hpp"
#include "ftsweep/rng.hpp"

namespace ftsweep {

/// Runtime handle on a classifier. Exposes the flattened layer list, per-layer
/// trainability control, and content hashes of layer state so freeze semantics
/// can be audited. Training capability depends on the concrete type.
class Model {
 public:
  virtual ~Model() = default;

  virtual const ModelIR& ir() const = 0;
  virtual void set_layer_trainable(std::size_t backbone_index, bool trainable) = 0;
  virtual std::string layer_state_hash(std::size_t backbone_index) const = 0;
  virtual std::string head_state_hash() const = 0;
  virtual bool supports_training() const = 0;

  const std::string& architecture() const { return ir().architecture; }

  std::size_t trainable_layer_count() const {
    std::size_t n = 0;
    for (const auto& l : ir().backbone) n += l.trainable ? 1 : 0;
    return n;
  }
};

/// Digest over the full weight state, backbone layers in order then head.
inline std::string model_state_hash(const Model& model) {
  Sha256Stream s;
  for (std::size_t i = 0; i < model.ir().backbone.size(); ++i) {
    s.update(model.layer_state_hash(i));
  }
  s.update(model.head_state_hash());
  return s.hex();
}

namespace detail {
constexpr char kArchiveMagic[] = "FTSWEEPW1\n";

inline void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw IoError("weight archive truncated");
  return v;
}
}  // namespace detail

/// Structural model: owns one flat float buffer per layer but no compute
/// graph. Covers the pretrained backbones, where the sweep needs exact
/// bookkeeping and freeze auditing rather than on-device training.
class ManifestModel : public Model {
 public:
  ManifestModel(ModelIR ir, std::uint64_t seed) : ir_(std::move(ir)) {
    weights_.resize(ir_.backbone.size());
    for (std::size_t i = 0; i < ir_.backbone.size(); ++i) {
      weights_[i] = init_buffer(ir_.backbone[i].param_count, seed, ir_.backbone[i].name);
    }
    head_weights_ = init_buffer(ir_.head.param_count, seed, "head:" + ir_.head.name);
  }

  const ModelIR& ir() const override { return ir_; }

  void set_layer_trainable(std::size_t i, bool trainable) override {
    check_index(i);
    ir_.backbone[i].trainable = trainable;
  }

  std::string layer_state_hash(std::size_t i) const override {
    check_index(i);
    return sha256_hex(std::span<const float>(weights_[i]));
  }

  std::string head_state_hash() const override {
    return sha256_hex(std::span<const float>(head_weights_));
  }

  bool supports_training() const override { return false; }

  std::span<const float> layer_weights(std::size_t i) const {
    check_index(i);
    return weights_[i];
  }
  std::span<float> mutable_layer_weights(std::size_t i) {
    check_index(i);
    return weights_[i];
  }
  std::span<float> mutable_head_weights() { return head_weights_; }

  void save_archive(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write weight archive " + path.string());
    out.write(detail::kArchiveMagic, sizeof(detail::kArchiveMagic) - 1);
    detail::write_u64(out, ir_.architecture.size());
    out.write(ir_.architecture.data(), static_cast<std::streamsize>(ir_.architecture.size()));
    detail::write_u64(out, weights_.size());
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      const auto& name = ir_.backbone[i].name;
      detail::write_u64(out, name.size());
      out.write(name.data(), static_cast<std::streamsize>(name.size()));
      detail::write_u64(out, weights_[i].size());
      out.write(reinterpret_cast<const char*>(weights_[i].data()),
                static_cast<std::streamsize>(weights_[i].size() * sizeof(float)));
    }
    detail::write_u64(out, head_weights_.size());
    out.write(reinterpret_cast<const char*>(head_weights_.data()),
              static_cast<std::streamsize>(head_weights_.size() * sizeof(float)));
    if (!out) throw IoError("short write on weight archive " + path.string());
  }

  void load_archive(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw WeightsUnavailableError("weight archive not found: " + path.string());
    char magic[sizeof(detail::kArchiveMagic) - 1];
    in.read(magic, sizeof magic);
    if (!in || std::string_view(magic, sizeof magic) != detail::kArchiveMagic) {
      throw IoError("bad magic in weight archive " + path.string());
    }
    const auto arch_len = detail::read_u64(in);
    std::string arch(arch_len, '\0');
    in.read(arch.data(), static_cast<std::streamsize>(arch_len));
    if (arch != ir_.architecture) {
      throw IoError("weight archive is for '" + arch + "', model is '" + ir_.architecture + "'");
    }
    const auto layer_count = detail::read_u64(in);
    if (layer_count != weights_.size()) {
      throw IoError("weight archive layer count mismatch in " + path.string());
    }
    for (std::size_t i = 0; i < layer_count; ++i) {
      const auto name_len = detail::read_u64(in);
      std::string name(name_len, '\0');
      in.read(name.data(), static_cast<std::streamsize>(name_len));
      if (name != ir_.backbone[i].name) {
        throw IoError("weight archive layer " + std::to_string(i) + " is '" + name +
                      "', expected '" + ir_.backbone[i].name + "'");
      }
      const auto count = detail::read_u64(in);
      if (count != weights_[i].size()) {
        throw IoError("weight archive size mismatch at layer '" + name + "'");
      }
      in.read(reinterpret_cast<char*>(weights_[i].data()),
              static_cast<std::streamsize>(count * sizeof(float)));
    }
    const auto head_count = detail::read_u64(in);
    if (head_count != head_weights_.size()) {
      throw IoError("weight archive head size mismatch in " + path.string());
    }
    in.read(reinterpret_cast<char*>(head_weights_.data()),
            static_cast<std::streamsize>(head_count * sizeof(float)));
    if (!in) throw IoError("weight archive truncated: " + path.string());
  }

 private:
  void check_index(std::size_t i) const {
    if (i >= ir_.backbone.size()) {
      throw DepthOutOfRangeError("layer index " + std::to_string(i) + " out of range for " +
                                 ir_.architecture);
    }
  }

  static std::vector<float> init_buffer(std::size_t count, std::uint64_t seed,
                                        const std::string& tag) {
    std::vector<float> buf(count);
    Rng rng(mix_seed(seed, tag));
    for (auto& v : buf) v = static_cast<float>(0.05 * rng.normal());
    return buf;
  }

  ModelIR ir_;
  std::vector<std::vector<float>> weights_;
  std::vector<float> head_weights_;
};

/// Model backed by the in-process layer engine. The network layout is
/// [backbone layers..., global average pool, dense head]; freeze control and
/// hashing address the backbone slice, the dense layer is the head.
class NativeModel : public Model {
 public:
  NativeModel(std::string architecture, std::unique_ptr<nn::Network<float>> net,
              std::size_t backbone_layers, std::size_t input_size)
      : net_(std::move(net)), backbone_layers_(backbone_layers) {
    if (net_->size() != backbone_layers + 2) {
      throw Error("native model '" + architecture + "' must end with pooling and a dense head");
    }
    auto* dense = dynamic_cast<nn::Dense<float>*>(&net_->layer(net_->size() - 1));
    if (dense == nullptr) throw Error("native model head must be a dense layer");

    ir_.architecture = std::move(architecture);
    ir_.input_size = input_size;
    ir_.num_classes = dense->out_dim();
    ir_.feature_dim = dense->in_dim();
    for (std::size_t i = 0; i < backbone_layers_; ++i) {
      const auto& l = net_->layer(i);
      LayerSpec spec;
      spec.index = i;
      spec.name = l.name();
      spec.kind = std::string(l.kind());
      spec.param_count = l.param_count();
      spec.trainable_param_count = l.trainable_param_count();
      spec.trainable = l.trainable();
      ir_.backbone.push_back(std::move(spec));
    }
    ir_.head.index = backbone_layers_;
    ir_.head.name = dense->name();
    ir_.head.kind = "dense";
    ir_.head.param_count = dense->param_count();
    ir_.head.trainable_param_count = dense->trainable_param_count();
    ir_.head.trainable = true;
  }

  const ModelIR& ir() const override { return ir_; }

  void set_layer_trainable(std::size_t i, bool trainable) override {
    if (i >= backbone_layers_) {
      throw DepthOutOfRangeError("layer index " + std::to_string(i) + " out of range for " +
                                 ir_.architecture);
    }
    net_->layer(i).set_trainable(trainable);
    ir_.backbone[i].trainable = trainable;
  }

  std::string layer_state_hash(std::size_t i) const override {
    if (i >= backbone_layers_) {
      throw DepthOutOfRangeError("layer index " + std::to_string(i) + " out of range for " +
                                 ir_.architecture);
    }
    return hash_layer(net_->layer(i));
  }

  std::string head_state_hash() const override {
    return hash_layer(net_->layer(net_->size() - 1));
  }

  bool supports_training() const override { return true; }

  nn::Network<float>& network() { return *net_; }
  std::size_t backbone_layers() const { return backbone_layers_; }

 private:
  static std::string hash_layer(const nn::Layer<float>& l) {
    Sha256Stream s;
    for (std::size_t t = 0; t < l.tensor_count(); ++t) {
      const auto& w = l.weight(t);
      s.update(w.data(), w.size() * sizeof(float));
    }
    return s.hex();
  }

  std::unique_ptr<nn::Network<float>> net_;
  std::size_t backbone_layers_;
  ModelIR ir_;
};

}  // namespace ftsweep
