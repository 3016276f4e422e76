#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "roadnav/common/json_util.h"

namespace roadnav::nn {

enum class LayerKind {
  kConv,
  kMaxPool,
  kAvgPool,
  kDense,
  kRelu,
  kSigmoid,
  kSoftmax,
  kConcat,
  kFlatten,
  kBatchNorm,
};

std::string_view to_string(LayerKind kind);
LayerKind layer_kind_from_string(std::string_view name);

struct LayerSpec {
  LayerKind kind = LayerKind::kRelu;
  int kernel_h = 1;  // conv, pools
  int kernel_w = 1;
  int stride = 1;
  int padding = 0;
  int channels_out = 0;  // conv, dense
  bool global = false;   // pools: window spans the whole input
  bool frozen = false;   // weight layers: excluded from gradients and updates
  std::vector<std::vector<LayerSpec>> branches;  // concat: each branch sees the same input

  static LayerSpec conv(int out, int k, int stride = 1, int padding = 0);
  static LayerSpec maxpool(int k, int stride, int padding = 0);
  static LayerSpec avgpool(int k, int stride, int padding = 0);
  static LayerSpec global_avgpool();
  static LayerSpec dense(int out);
  static LayerSpec simple(LayerKind kind);
  static LayerSpec concat(std::vector<std::vector<LayerSpec>> branches);

  bool has_weights() const { return kind == LayerKind::kConv || kind == LayerKind::kDense; }

  Json to_json() const;
  static LayerSpec from_json(const Json& j);
  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

inline constexpr int kNumHeads = 5;

struct NetworkSpec {
  std::string name = "custom";
  int input_size = 100;
  int input_channels = 1;
  std::vector<LayerSpec> layers;

  // Throws SpecViolation: conv kernel outside {1,3}, a non-global pooling
  // window above 3x3, shape inconsistencies, or a
  // head that is not five sigmoid units.
  void validate() const;

  // C x H x W after the last layer for a single sample.
  std::array<int, 3> output_shape() const;

  // Layers carrying trainable weights (conv + dense), branches included.
  int weight_layer_count() const;

  bool has_batchnorm() const;

  Json to_json() const;
  static NetworkSpec from_json(const Json& j);
  Digest digest() const { return json_digest(to_json()); }
  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

// Inception block: {1x1}, {1x1 -> 3x3}, {1x1 -> 3x3 -> 3x3}, {3x3 max pool -> 1x1}.
LayerSpec inception_block(int b1, int r2, int o2, int r3, int m3, int o3, int p4);

NetworkSpec full_preset();  // 100x100 input, 39 weight layers
NetworkSpec tiny_preset();  // 32x32 input, 8 weight layers
NetworkSpec preset(std::string_view name);

}  // namespace roadnav::nn
