#include "roadnav/nn/spec.h"

#include <utility>

#include "roadnav/common/error.h"

namespace roadnav::nn {
namespace {

constexpr std::pair<LayerKind, std::string_view> kKindNames[] = {
    {LayerKind::kConv, "conv"},       {LayerKind::kMaxPool, "maxpool"},
    {LayerKind::kAvgPool, "avgpool"}, {LayerKind::kDense, "dense"},
    {LayerKind::kRelu, "relu"},       {LayerKind::kSigmoid, "sigmoid"},
    {LayerKind::kSoftmax, "softmax"}, {LayerKind::kConcat, "concat"},
    {LayerKind::kFlatten, "flatten"}, {LayerKind::kBatchNorm, "batchnorm"},
};

struct Shape {
  int c, h, w;
};

Shape infer(const std::vector<LayerSpec>& layers, Shape s, const std::string& where);

Shape infer_one(const LayerSpec& l, Shape s, const std::string& where) {
  auto fail = [&](const std::string& msg) {
    throw SpecViolation("network spec " + where + " (" + std::string(to_string(l.kind)) + "): " + msg);
  };
  auto extent = [&](int in, int k) {
    if (l.stride < 1) fail("stride must be >= 1");
    if (l.padding < 0) fail("negative padding");
    const int span = in + 2 * l.padding - k;
    if (span < 0) fail("window exceeds padded input");
    return span / l.stride + 1;
  };
  switch (l.kind) {
    case LayerKind::kConv:
      for (int k : {l.kernel_h, l.kernel_w}) {
        if (k != 1 && k != 3) fail("kernel extent " + std::to_string(k) + " not in {1, 3}");
      }
      if (l.channels_out < 1) fail("channels_out must be >= 1");
      return {l.channels_out, extent(s.h, l.kernel_h), extent(s.w, l.kernel_w)};
    case LayerKind::kMaxPool:
    case LayerKind::kAvgPool:
      if (l.global) return {s.c, 1, 1};
      if (l.kernel_h < 1 || l.kernel_w < 1) fail("window must be positive");
      if (l.kernel_h > 3 || l.kernel_w > 3) fail("pooling window larger than 3x3");
      if (l.padding >= l.kernel_h || l.padding >= l.kernel_w) fail("padding must be below the window");
      return {s.c, extent(s.h, l.kernel_h), extent(s.w, l.kernel_w)};
    case LayerKind::kDense:
      if (l.channels_out < 1) fail("channels_out must be >= 1");
      return {l.channels_out, 1, 1};
    case LayerKind::kFlatten:
      return {s.c * s.h * s.w, 1, 1};
    case LayerKind::kConcat: {
      if (l.branches.empty()) fail("no branches");
      int channels = 0;
      Shape first{0, -1, -1};
      for (std::size_t b = 0; b < l.branches.size(); ++b) {
        if (l.branches[b].empty()) fail("empty branch");
        const Shape o = infer(l.branches[b], s, where + ".branch" + std::to_string(b));
        if (first.h < 0) first = o;
        if (o.h != first.h || o.w != first.w) fail("branch spatial extents differ");
        channels += o.c;
      }
      return {channels, first.h, first.w};
    }
    case LayerKind::kRelu:
    case LayerKind::kSigmoid:
    case LayerKind::kSoftmax:
    case LayerKind::kBatchNorm:
      return s;
  }
  fail("unknown layer kind");
  return s;
}

Shape infer(const std::vector<LayerSpec>& layers, Shape s, const std::string& where) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    s = infer_one(layers[i], s, where + "[" + std::to_string(i) + "]");
  }
  return s;
}

int count_weight_layers(const std::vector<LayerSpec>& layers) {
  int n = 0;
  for (const LayerSpec& l : layers) {
    if (l.has_weights()) ++n;
    for (const auto& b : l.branches) n += count_weight_layers(b);
  }
  return n;
}

bool any_batchnorm(const std::vector<LayerSpec>& layers) {
  for (const LayerSpec& l : layers) {
    if (l.kind == LayerKind::kBatchNorm) return true;
    for (const auto& b : l.branches) {
      if (any_batchnorm(b)) return true;
    }
  }
  return false;
}

Json layers_to_json(const std::vector<LayerSpec>& layers) {
  Json arr = Json::array();
  for (const LayerSpec& l : layers) arr.push_back(l.to_json());
  return arr;
}

std::vector<LayerSpec> layers_from_json(const Json& arr) {
  if (!arr.is_array()) throw InvalidInput("network spec: layers must be an array");
  std::vector<LayerSpec> out;
  for (const Json& j : arr) out.push_back(LayerSpec::from_json(j));
  return out;
}

}  // namespace

std::string_view to_string(LayerKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

LayerKind layer_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  throw InvalidInput("network spec: unknown layer kind '" + std::string(name) + "'");
}

LayerSpec LayerSpec::conv(int out, int k, int stride, int padding) {
  LayerSpec l;
  l.kind = LayerKind::kConv;
  l.kernel_h = l.kernel_w = k;
  l.stride = stride;
  l.padding = padding;
  l.channels_out = out;
  return l;
}

LayerSpec LayerSpec::maxpool(int k, int stride, int padding) {
  LayerSpec l;
  l.kind = LayerKind::kMaxPool;
  l.kernel_h = l.kernel_w = k;
  l.stride = stride;
  l.padding = padding;
  return l;
}

LayerSpec LayerSpec::avgpool(int k, int stride, int padding) {
  LayerSpec l = maxpool(k, stride, padding);
  l.kind = LayerKind::kAvgPool;
  return l;
}

LayerSpec LayerSpec::global_avgpool() {
  LayerSpec l;
  l.kind = LayerKind::kAvgPool;
  l.global = true;
  return l;
}

LayerSpec LayerSpec::dense(int out) {
  LayerSpec l;
  l.kind = LayerKind::kDense;
  l.channels_out = out;
  return l;
}

LayerSpec LayerSpec::simple(LayerKind kind) {
  LayerSpec l;
  l.kind = kind;
  return l;
}

LayerSpec LayerSpec::concat(std::vector<std::vector<LayerSpec>> branches) {
  LayerSpec l;
  l.kind = LayerKind::kConcat;
  l.branches = std::move(branches);
  return l;
}

Json LayerSpec::to_json() const {
  Json j{{"kind", to_string(kind)}};
  switch (kind) {
    case LayerKind::kConv:
      j["kernel"] = {kernel_h, kernel_w};
      j["stride"] = stride;
      j["padding"] = padding;
      j["channels_out"] = channels_out;
      j["frozen"] = frozen;
      break;
    case LayerKind::kMaxPool:
    case LayerKind::kAvgPool:
      j["global"] = global;
      if (!global) {
        j["kernel"] = {kernel_h, kernel_w};
        j["stride"] = stride;
        j["padding"] = padding;
      }
      break;
    case LayerKind::kDense:
      j["channels_out"] = channels_out;
      j["frozen"] = frozen;
      break;
    case LayerKind::kConcat: {
      Json arr = Json::array();
      for (const auto& b : branches) arr.push_back(layers_to_json(b));
      j["branches"] = arr;
      break;
    }
    default:
      break;
  }
  return j;
}

LayerSpec LayerSpec::from_json(const Json& j) {
  if (!j.is_object()) throw InvalidInput("network spec: layer must be an object");
  reject_unknown_keys(j, {"kind", "kernel", "stride", "padding", "channels_out", "global", "frozen",
                          "branches"},
                      "layer");
  LayerSpec l;
  l.kind = layer_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("kernel")) {
    const Json& k = j["kernel"];
    if (!k.is_array() || k.size() != 2) throw InvalidInput("layer: kernel must be [h, w]");
    l.kernel_h = k[0].get<int>();
    l.kernel_w = k[1].get<int>();
  }
  l.stride = j.value("stride", 1);
  l.padding = j.value("padding", 0);
  l.channels_out = j.value("channels_out", 0);
  l.global = j.value("global", false);
  l.frozen = j.value("frozen", false);
  if (j.contains("branches")) {
    for (const Json& b : j["branches"]) l.branches.push_back(layers_from_json(b));
  }
  return l;
}

void NetworkSpec::validate() const {
  if (input_size < 1 || input_channels < 1) throw SpecViolation("network spec: bad input extent");
  if (layers.empty()) throw SpecViolation("network spec: no layers");
  const auto out = output_shape();
  if (out[0] != kNumHeads || out[1] != 1 || out[2] != 1) {
    throw SpecViolation("network spec: head must produce exactly 5 units");
  }
  if (layers.back().kind != LayerKind::kSigmoid) {
    throw SpecViolation("network spec: head must end in a sigmoid");
  }
}

std::array<int, 3> NetworkSpec::output_shape() const {
  const Shape s = infer(layers, {input_channels, input_size, input_size}, "layers");
  return {s.c, s.h, s.w};
}

int NetworkSpec::weight_layer_count() const { return count_weight_layers(layers); }

bool NetworkSpec::has_batchnorm() const { return any_batchnorm(layers); }

Json NetworkSpec::to_json() const {
  return Json{{"name", name},
              {"input_size", input_size},
              {"input_channels", input_channels},
              {"layers", layers_to_json(layers)}};
}

NetworkSpec NetworkSpec::from_json(const Json& j) {
  if (!j.is_object()) throw InvalidInput("network spec: expected an object");
  reject_unknown_keys(j, {"name", "input_size", "input_channels", "layers"}, "network spec");
  NetworkSpec s;
  s.name = j.value("name", s.name);
  s.input_size = j.value("input_size", s.input_size);
  s.input_channels = j.value("input_channels", s.input_channels);
  s.layers = layers_from_json(j.at("layers"));
  return s;
}

LayerSpec inception_block(int b1, int r2, int o2, int r3, int m3, int o3, int p4) {
  const LayerSpec relu = LayerSpec::simple(LayerKind::kRelu);
  return LayerSpec::concat({
      {LayerSpec::conv(b1, 1), relu},
      {LayerSpec::conv(r2, 1), relu, LayerSpec::conv(o2, 3, 1, 1), relu},
      {LayerSpec::conv(r3, 1), relu, LayerSpec::conv(m3, 3, 1, 1), relu,
       LayerSpec::conv(o3, 3, 1, 1), relu},
      {LayerSpec::maxpool(3, 1, 1), LayerSpec::conv(p4, 1), relu},
  });
}

NetworkSpec full_preset() {
  const LayerSpec relu = LayerSpec::simple(LayerKind::kRelu);
  NetworkSpec s;
  s.name = "full";
  s.input_size = 100;
  s.layers = {
      LayerSpec::conv(32, 3, 2, 1), relu,   // 50x50
      LayerSpec::conv(64, 3, 1, 1), relu,
      LayerSpec::maxpool(3, 2),             // 24x24
      LayerSpec::conv(192, 3, 1, 1), relu,
      LayerSpec::maxpool(3, 2),             // 11x11
      inception_block(64, 64, 96, 64, 96, 96, 64),
      inception_block(96, 96, 128, 96, 128, 128, 96),
      LayerSpec::maxpool(3, 2),             // 5x5
      inception_block(160, 128, 192, 128, 192, 192, 160),
      inception_block(224, 160, 256, 160, 256, 256, 224),
      inception_block(224, 160, 288, 160, 288, 288, 224),
      LayerSpec::global_avgpool(),
      LayerSpec::dense(kNumHeads),
      LayerSpec::simple(LayerKind::kSigmoid),
  };
  return s;
}

NetworkSpec tiny_preset() {
  const LayerSpec relu = LayerSpec::simple(LayerKind::kRelu);
  NetworkSpec s;
  s.name = "tiny";
  s.input_size = 32;
  s.layers = {
      LayerSpec::conv(8, 3, 2, 1), relu,    // 16x16
      LayerSpec::conv(16, 3, 2, 1), relu,   // 8x8
      LayerSpec::concat({
          {LayerSpec::conv(8, 1), relu},
          {LayerSpec::conv(8, 1), relu, LayerSpec::conv(16, 3, 1, 1), relu},
          {LayerSpec::maxpool(3, 1, 1), LayerSpec::conv(8, 1), relu},
      }),
      LayerSpec::maxpool(2, 2),             // 4x4, 32 channels
      LayerSpec::simple(LayerKind::kFlatten),
      LayerSpec::dense(32), relu,
      LayerSpec::dense(kNumHeads),
      LayerSpec::simple(LayerKind::kSigmoid),
  };
  return s;
}

NetworkSpec preset(std::string_view name) {
  if (name == "full") return full_preset();
  if (name == "tiny") return tiny_preset();
  throw InvalidInput("unknown network preset '" + std::string(name) + "'");
}

}  // namespace roadnav::nn
