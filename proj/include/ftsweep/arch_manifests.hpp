#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ftsweep/errors.hpp"
#include "ftsweep/ir.hpp"

namespace ftsweep::manifests {

/// Builders for the flattened layer lists of the seven supported backbones.
/// Layer order follows each network's functional graph; parameter counts are
/// exact, and every builder cross-checks its pinned total before returning.

namespace detail {

class Builder {
 public:
  void add(std::string name, std::string kind, std::size_t params, std::size_t trainable) {
    LayerSpec spec;
    spec.index = layers_.size();
    spec.name = std::move(name);
    spec.kind = std::move(kind);
    spec.param_count = params;
    spec.trainable_param_count = trainable;
    layers_.push_back(std::move(spec));
  }

  void zero(std::string name, std::string kind) { add(std::move(name), std::move(kind), 0, 0); }

  void conv(std::string name, std::size_t cin, std::size_t cout, std::size_t k, bool bias) {
    const std::size_t p = k * k * cin * cout + (bias ? cout : 0);
    add(std::move(name), "conv2d", p, p);
  }

  void dwconv(std::string name, std::size_t c, std::size_t k) {
    const std::size_t p = k * k * c;
    add(std::move(name), "depthwise_conv2d", p, p);
  }

  void sepconv(std::string name, std::size_t cin, std::size_t cout, std::size_t k) {
    const std::size_t p = k * k * cin + cin * cout;
    add(std::move(name), "separable_conv2d", p, p);
  }

  void bn(std::string name, std::size_t c) { add(std::move(name), "batch_norm", 4 * c, 2 * c); }

  std::vector<LayerSpec> take(const char* arch, std::size_t expected_layers,
                              std::size_t expected_params) {
    std::size_t total = 0;
    for (const auto& l : layers_) total += l.param_count;
    if (layers_.size() != expected_layers) {
      throw Error(std::string(arch) + " manifest has " + std::to_string(layers_.size()) +
                  " layers, expected " + std::to_string(expected_layers));
    }
    if (total != expected_params) {
      throw Error(std::string(arch) + " manifest has " + std::to_string(total) +
                  " params, expected " + std::to_string(expected_params));
    }
    return std::move(layers_);
  }

 private:
  std::vector<LayerSpec> layers_;
};

}  // namespace detail

inline std::vector<LayerSpec> resnet50() {
  detail::Builder b;
  b.zero("conv1_pad", "zero_padding");
  b.conv("conv1_conv", 3, 64, 7, true);
  b.bn("conv1_bn", 64);
  b.zero("conv1_relu", "relu");
  b.zero("pool1_pad", "zero_padding");
  b.zero("pool1_pool", "max_pool");

  struct Stage { const char* name; std::size_t cin, f, blocks; };
  const Stage stages[] = {
      {"conv2", 64, 64, 3}, {"conv3", 256, 128, 4}, {"conv4", 512, 256, 6}, {"conv5", 1024, 512, 3}};
  for (const auto& s : stages) {
    for (std::size_t blk = 1; blk <= s.blocks; ++blk) {
      const std::string p = std::string(s.name) + "_block" + std::to_string(blk) + "_";
      const std::size_t cin = blk == 1 ? s.cin : 4 * s.f;
      b.conv(p + "1_conv", cin, s.f, 1, true);
      b.bn(p + "1_bn", s.f);
      b.zero(p + "1_relu", "relu");
      b.conv(p + "2_conv", s.f, s.f, 3, true);
      b.bn(p + "2_bn", s.f);
      b.zero(p + "2_relu", "relu");
      if (blk == 1) b.conv(p + "0_conv", cin, 4 * s.f, 1, true);
      b.conv(p + "3_conv", s.f, 4 * s.f, 1, true);
      if (blk == 1) b.bn(p + "0_bn", 4 * s.f);
      b.bn(p + "3_bn", 4 * s.f);
      b.zero(p + "add", "add");
      b.zero(p + "out", "relu");
    }
  }
  return b.take("resnet50", 174, 23587712);
}

inline std::vector<LayerSpec> vgg16() {
  detail::Builder b;
  struct Block { const char* name; std::size_t cin, cout, convs; };
  const Block blocks[] = {{"block1", 3, 64, 2},
                          {"block2", 64, 128, 2},
                          {"block3", 128, 256, 3},
                          {"block4", 256, 512, 3},
                          {"block5", 512, 512, 3}};
  for (const auto& blk : blocks) {
    std::size_t cin = blk.cin;
    for (std::size_t i = 1; i <= blk.convs; ++i) {
      b.conv(std::string(blk.name) + "_conv" + std::to_string(i), cin, blk.cout, 3, true);
      cin = blk.cout;
    }
    b.zero(std::string(blk.name) + "_pool", "max_pool");
  }
  return b.take("vgg16", 18, 14714688);
}

inline std::vector<LayerSpec> densenet121() {
  detail::Builder b;
  b.zero("zero_padding2d", "zero_padding");
  b.conv("conv1/conv", 3, 64, 7, false);
  b.bn("conv1/bn", 64);
  b.zero("conv1/relu", "relu");
  b.zero("zero_padding2d_1", "zero_padding");
  b.zero("pool1", "max_pool");

  const std::size_t growth = 32;
  const std::size_t block_sizes[] = {6, 12, 24, 16};
  std::size_t channels = 64;
  for (std::size_t stage = 0; stage < 4; ++stage) {
    const std::string sname = "conv" + std::to_string(stage + 2);
    for (std::size_t blk = 1; blk <= block_sizes[stage]; ++blk) {
      const std::string p = sname + "_block" + std::to_string(blk) + "_";
      b.bn(p + "0_bn", channels);
      b.zero(p + "0_relu", "relu");
      b.conv(p + "1_conv", channels, 4 * growth, 1, false);
      b.bn(p + "1_bn", 4 * growth);
      b.zero(p + "1_relu", "relu");
      b.conv(p + "2_conv", 4 * growth, growth, 3, false);
      b.zero(p + "concat", "concat");
      channels += growth;
    }
    if (stage < 3) {
      const std::string p = "pool" + std::to_string(stage + 2) + "_";
      b.bn(p + "bn", channels);
      b.zero(p + "relu", "relu");
      b.conv(p + "conv", channels, channels / 2, 1, false);
      b.zero(p + "pool", "avg_pool");
      channels /= 2;
    }
  }
  b.bn("bn", channels);
  b.zero("relu", "relu");
  return b.take("densenet121", 426, 7037504);
}

inline std::vector<LayerSpec> xception() {
  detail::Builder b;
  b.conv("block1_conv1", 3, 32, 3, false);
  b.bn("block1_conv1_bn", 32);
  b.zero("block1_conv1_act", "relu");
  b.conv("block1_conv2", 32, 64, 3, false);
  b.bn("block1_conv2_bn", 64);
  b.zero("block1_conv2_act", "relu");

  std::size_t anon = 0;  // shared counter for the unnamed residual conv/bn/add layers
  auto suffix = [&anon]() { return anon == 0 ? std::string() : "_" + std::to_string(anon); };

  // entry flow residual blocks; block2 has no leading activation
  struct Entry { std::size_t id, cin, cout; };
  for (const Entry e : {Entry{2, 64, 128}, Entry{3, 128, 256}, Entry{4, 256, 728}}) {
    const std::string p = "block" + std::to_string(e.id) + "_";
    if (e.id != 2) b.zero(p + "sepconv1_act", "relu");
    b.sepconv(p + "sepconv1", e.cin, e.cout, 3);
    b.bn(p + "sepconv1_bn", e.cout);
    b.zero(p + "sepconv2_act", "relu");
    b.sepconv(p + "sepconv2", e.cout, e.cout, 3);
    b.bn(p + "sepconv2_bn", e.cout);
    b.conv("conv2d" + suffix(), e.cin, e.cout, 1, false);
    b.zero(p + "pool", "max_pool");
    b.bn("batch_normalization" + suffix(), e.cout);
    b.zero("add" + suffix(), "add");
    ++anon;
  }

  std::size_t add_count = 3;
  for (std::size_t id = 5; id <= 12; ++id) {
    const std::string p = "block" + std::to_string(id) + "_";
    for (std::size_t i = 1; i <= 3; ++i) {
      b.zero(p + "sepconv" + std::to_string(i) + "_act", "relu");
      b.sepconv(p + "sepconv" + std::to_string(i), 728, 728, 3);
      b.bn(p + "sepconv" + std::to_string(i) + "_bn", 728);
    }
    b.zero("add_" + std::to_string(add_count++), "add");
  }

  b.zero("block13_sepconv1_act", "relu");
  b.sepconv("block13_sepconv1", 728, 728, 3);
  b.bn("block13_sepconv1_bn", 728);
  b.zero("block13_sepconv2_act", "relu");
  b.sepconv("block13_sepconv2", 728, 1024, 3);
  b.bn("block13_sepconv2_bn", 1024);
  b.conv("conv2d" + suffix(), 728, 1024, 1, false);
  b.zero("block13_pool", "max_pool");
  b.bn("batch_normalization" + suffix(), 1024);
  b.zero("add_" + std::to_string(add_count), "add");

  b.sepconv("block14_sepconv1", 1024, 1536, 3);
  b.bn("block14_sepconv1_bn", 1536);
  b.zero("block14_sepconv1_act", "relu");
  b.sepconv("block14_sepconv2", 1536, 2048, 3);
  b.bn("block14_sepconv2_bn", 2048);
  b.zero("block14_sepconv2_act", "relu");
  return b.take("xception", 131, 20861480);
}

inline std::vector<LayerSpec> mobilenetv2() {
  detail::Builder b;
  b.conv("Conv1", 3, 32, 3, false);
  b.bn("bn_Conv1", 32);
  b.zero("Conv1_relu", "relu");

  b.dwconv("expanded_conv_depthwise", 32, 3);
  b.bn("expanded_conv_depthwise_BN", 32);
  b.zero("expanded_conv_depthwise_relu", "relu");
  b.conv("expanded_conv_project", 32, 16, 1, false);
  b.bn("expanded_conv_project_BN", 16);

  const std::size_t couts[] = {24, 24, 32, 32, 32, 64, 64, 64, 64, 96, 96, 96, 160, 160, 160, 320};
  const bool stride2[] = {true, false, true, false, false, true, false, false,
                          false, false, false, false, true, false, false, false};
  std::size_t cin = 16;
  for (std::size_t n = 1; n <= 16; ++n) {
    const std::string p = "block_" + std::to_string(n) + "_";
    const std::size_t cout = couts[n - 1];
    const std::size_t mid = cin * 6;
    const bool residual = !stride2[n - 1] && cin == cout;
    b.conv(p + "expand", cin, mid, 1, false);
    b.bn(p + "expand_BN", mid);
    b.zero(p + "expand_relu", "relu");
    if (stride2[n - 1]) b.zero(p + "pad", "zero_padding");
    b.dwconv(p + "depthwise", mid, 3);
    b.bn(p + "depthwise_BN", mid);
    b.zero(p + "depthwise_relu", "relu");
    b.conv(p + "project", mid, cout, 1, false);
    b.bn(p + "project_BN", cout);
    if (residual) b.zero(p + "add", "add");
    cin = cout;
  }

  b.conv("Conv_1", 320, 1280, 1, false);
  b.bn("Conv_1_bn", 1280);
  b.zero("out_relu", "relu");
  return b.take("mobilenetv2", 153, 2257984);
}

inline std::vector<LayerSpec> efficientnetb2() {
  detail::Builder b;
  b.zero("rescaling", "rescaling");
  b.add("normalization", "normalization", 7, 0);  // per-channel mean/variance/count buffers
  b.zero("stem_conv_pad", "zero_padding");
  b.conv("stem_conv", 3, 32, 3, false);
  b.bn("stem_bn", 32);
  b.zero("stem_activation", "relu");

  struct Stage { std::size_t repeats, cout, kernel, expand; bool stride2; };
  const Stage stages[] = {{2, 16, 3, 1, false},  {3, 24, 3, 6, true}, {3, 48, 5, 6, true},
                          {4, 88, 3, 6, true},   {4, 120, 5, 6, false}, {5, 208, 5, 6, true},
                          {2, 352, 3, 6, false}};
  std::size_t cin = 32;
  for (std::size_t si = 0; si < 7; ++si) {
    const Stage& st = stages[si];
    for (std::size_t r = 0; r < st.repeats; ++r) {
      const std::string p = "block" + std::to_string(si + 1) + std::string(1, char('a' + r)) + "_";
      const bool s2 = st.stride2 && r == 0;
      const std::size_t mid = cin * st.expand;
      const bool residual = !s2 && cin == st.cout;
      if (st.expand != 1) {
        b.conv(p + "expand_conv", cin, mid, 1, false);
        b.bn(p + "expand_bn", mid);
        b.zero(p + "expand_activation", "relu");
      }
      if (s2) b.zero(p + "dwconv_pad", "zero_padding");
      b.dwconv(p + "dwconv", mid, st.kernel);
      b.bn(p + "bn", mid);
      b.zero(p + "activation", "relu");
      const std::size_t se = std::max<std::size_t>(1, cin / 4);
      b.zero(p + "se_squeeze", "global_avg_pool");
      b.zero(p + "se_reshape", "reshape");
      b.conv(p + "se_reduce", mid, se, 1, true);
      b.conv(p + "se_expand", se, mid, 1, true);
      b.zero(p + "se_excite", "multiply");
      b.conv(p + "project_conv", mid, st.cout, 1, false);
      b.bn(p + "project_bn", st.cout);
      if (residual) {
        b.zero(p + "drop", "dropout");
        b.zero(p + "add", "add");
      }
      cin = st.cout;
    }
  }

  b.conv("top_conv", 352, 1408, 1, false);
  b.bn("top_bn", 1408);
  b.zero("top_activation", "relu");
  return b.take("efficientnetb2", 338, 7768569);
}

namespace detail {

/// NASNet assembly state: tracks the previous cell input (p path) and the
/// anonymous activation counter shared across the whole network.
struct NasnetState {
  Builder b;
  std::size_t act = 0;

  std::string next_act() {
    const std::string name = act == 0 ? "activation" : "activation_" + std::to_string(act);
    ++act;
    return name;
  }

  void sep_block(const std::string& prefix, std::size_t k, std::size_t cin, std::size_t f,
                 bool stride2) {
    b.zero(next_act(), "relu");
    if (stride2) b.zero("separable_conv_1_pad_" + prefix, "zero_padding");
    b.sepconv("separable_conv_1_" + prefix, cin, f, k);
    b.bn("separable_conv_1_bn_" + prefix, f);
    b.zero(next_act(), "relu");
    b.sepconv("separable_conv_2_" + prefix, f, f, k);
    b.bn("separable_conv_2_bn_" + prefix, f);
  }

  // Returns the p-path channel count after adjustment.
  std::size_t adjust(const std::string& id, std::size_t p_ch, std::size_t f, bool spatial) {
    if (spatial) {
      b.zero("adjust_relu_1_" + id, "relu");
      b.zero("adjust_avg_pool_1_" + id, "avg_pool");
      b.conv("adjust_conv_1_" + id, p_ch, f / 2, 1, false);
      b.zero("adjust_pad_" + id, "zero_padding");
      b.zero("adjust_crop_" + id, "cropping");
      b.zero("adjust_avg_pool_2_" + id, "avg_pool");
      b.conv("adjust_conv_2_" + id, p_ch, f / 2, 1, false);
      b.zero("adjust_concat_" + id, "concat");
      b.bn("adjust_bn_" + id, f);
      return f;
    }
    if (p_ch != f) {
      b.zero("adjust_relu_1_" + id, "relu");
      b.conv("adjust_projection_" + id, p_ch, f, 1, false);
      b.bn("adjust_bn_" + id, f);
      return f;
    }
    return p_ch;
  }
};

}  // namespace detail

inline std::vector<LayerSpec> nasnetmobile() {
  detail::NasnetState s;
  auto& b = s.b;
  b.conv("stem_conv1", 3, 32, 3, false);
  b.bn("stem_bn1", 32);

  // Cell inputs: x is the previous cell output, p the one before it.
  std::size_t x_ch = 32;
  std::size_t p_ch = 0;       // 0 while p is unset (first stem cell)
  bool p_mismatch = false;    // p lags one reduction behind x spatially

  auto reduction = [&](const std::string& id, std::size_t f) {
    const std::size_t pc = p_ch == 0 ? x_ch : s.adjust(id, p_ch, f, p_mismatch);
    b.zero(s.next_act(), "relu");
    b.conv("reduction_conv_1_" + id, x_ch, f, 1, false);
    b.bn("reduction_bn_1_" + id, f);
    b.zero("reduction_pad_1_" + id, "zero_padding");
    s.sep_block("reduction_left1_" + id, 5, f, f, true);
    s.sep_block("reduction_right1_" + id, 7, pc, f, true);
    b.zero("reduction_add_1_" + id, "add");
    b.zero("reduction_left2_" + id, "max_pool");
    s.sep_block("reduction_right2_" + id, 7, pc, f, true);
    b.zero("reduction_add_2_" + id, "add");
    b.zero("reduction_left3_" + id, "avg_pool");
    s.sep_block("reduction_right3_" + id, 5, pc, f, true);
    b.zero("reduction_add_3_" + id, "add");
    b.zero("reduction_left4_" + id, "avg_pool");
    b.zero("reduction_add_4_" + id, "add");
    s.sep_block("reduction_left5_" + id, 3, f, f, false);
    b.zero("reduction_right5_" + id, "max_pool");
    b.zero("reduction_add_5_" + id, "add");
    b.zero("reduction_concat_" + id, "concat");
    p_ch = x_ch;
    x_ch = 4 * f;
    p_mismatch = true;
  };

  auto normal = [&](const std::string& id, std::size_t f) {
    const std::size_t pc = s.adjust(id, p_ch, f, p_mismatch);
    b.zero(s.next_act(), "relu");
    b.conv("normal_conv_1_" + id, x_ch, f, 1, false);
    b.bn("normal_bn_1_" + id, f);
    s.sep_block("normal_left1_" + id, 5, f, f, false);
    s.sep_block("normal_right1_" + id, 3, pc, f, false);
    b.zero("normal_add_1_" + id, "add");
    s.sep_block("normal_left2_" + id, 5, pc, f, false);
    s.sep_block("normal_right2_" + id, 3, pc, f, false);
    b.zero("normal_add_2_" + id, "add");
    b.zero("normal_left3_" + id, "avg_pool");
    b.zero("normal_add_3_" + id, "add");
    b.zero("normal_left4_" + id, "avg_pool");
    b.zero("normal_right4_" + id, "avg_pool");
    b.zero("normal_add_4_" + id, "add");
    s.sep_block("normal_left5_" + id, 3, f, f, false);
    b.zero("normal_add_5_" + id, "add");
    b.zero("normal_concat_" + id, "concat");
    p_ch = x_ch;
    x_ch = pc + 5 * f;
    p_mismatch = false;
  };

  const std::size_t filters = 44;  // 1056 / 24
  reduction("stem_1", filters / 4);
  reduction("stem_2", filters / 2);
  for (std::size_t i = 0; i < 4; ++i) normal(std::to_string(i), filters);
  reduction("reduce_4", filters * 2);
  for (std::size_t i = 0; i < 4; ++i) normal(std::to_string(5 + i), filters * 2);
  reduction("reduce_8", filters * 4);
  for (std::size_t i = 0; i < 4; ++i) normal(std::to_string(10 + i), filters * 4);
  b.zero(s.next_act(), "relu");
  return b.take("nasnetmobile", 768, 4269716);
}

inline std::vector<LayerSpec> build(const std::string& arch) {
  if (arch == "resnet50") return resnet50();
  if (arch == "vgg16") return vgg16();
  if (arch == "densenet121") return densenet121();
  if (arch == "xception") return xception();
  if (arch == "efficientnetb2") return efficientnetb2();
  if (arch == "mobilenetv2") return mobilenetv2();
  if (arch == "nasnetmobile") return nasnetmobile();
  throw UnknownArchitectureError("no layer manifest for architecture '" + arch + "'");
}

}  // namespace ftsweep::manifests
