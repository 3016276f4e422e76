#include "roadnav/nn/network.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "graph.h"
#include "roadnav/common/error.h"
#include "roadnav/nn/ops.h"

namespace roadnav::nn {
namespace {

// Fixed so that gradient summation order never depends on the thread count.
constexpr int kGradChunks = 8;

void check_batch(const NetworkSpec& spec, const Tensor& batch) {
  if (batch.c() != spec.input_channels || batch.h() != spec.input_size ||
      batch.w() != spec.input_size) {
    throw InvalidShape("forward: expected " + std::to_string(spec.input_channels) + "x" +
                       std::to_string(spec.input_size) + "x" + std::to_string(spec.input_size) +
                       " input, got " + std::to_string(batch.c()) + "x" +
                       std::to_string(batch.h()) + "x" + std::to_string(batch.w()));
  }
  if (!batch.all_finite()) throw InvalidInput("forward: non-finite input");
}

// Parameter tensors for every slot with the shapes its layer spec implies.
std::vector<LayerParams> allocate_params(const NetworkSpec& spec) {
  std::vector<LayerParams> params;
  struct Walker {
    std::vector<LayerParams>& out;
    void walk(const std::vector<LayerSpec>& layers, int& c, int& h, int& w) {
      for (const LayerSpec& l : layers) {
        switch (l.kind) {
          case LayerKind::kConv:
            out.push_back({Tensor(l.channels_out, c, l.kernel_h, l.kernel_w),
                           Tensor(1, l.channels_out, 1, 1), {}, {}});
            h = (h + 2 * l.padding - l.kernel_h) / l.stride + 1;
            w = (w + 2 * l.padding - l.kernel_w) / l.stride + 1;
            c = l.channels_out;
            break;
          case LayerKind::kDense:
            out.push_back({Tensor(l.channels_out, c * h * w, 1, 1),
                           Tensor(1, l.channels_out, 1, 1), {}, {}});
            c = l.channels_out;
            h = w = 1;
            break;
          case LayerKind::kBatchNorm:
            out.push_back({Tensor(1, c, 1, 1, 1.0), Tensor(1, c, 1, 1), Tensor(1, c, 1, 1),
                           Tensor(1, c, 1, 1, 1.0)});
            break;
          case LayerKind::kMaxPool:
          case LayerKind::kAvgPool:
            if (l.global) {
              h = w = 1;
            } else {
              h = (h + 2 * l.padding - l.kernel_h) / l.stride + 1;
              w = (w + 2 * l.padding - l.kernel_w) / l.stride + 1;
            }
            break;
          case LayerKind::kFlatten:
            c = c * h * w;
            h = w = 1;
            break;
          case LayerKind::kConcat: {
            int total = 0, bh = h, bw = w;
            for (const auto& b : l.branches) {
              int cc = c, hh = h, ww = w;
              walk(b, cc, hh, ww);
              total += cc;
              bh = hh;
              bw = ww;
            }
            c = total;
            h = bh;
            w = bw;
            break;
          }
          default:
            break;
        }
      }
    }
  };
  int c = spec.input_channels, h = spec.input_size, w = spec.input_size;
  Walker{params}.walk(spec.layers, c, h, w);
  return params;
}

std::vector<std::pair<int, int>> chunk_ranges(int n, int chunks) {
  chunks = std::max(1, std::min(chunks, n));
  std::vector<std::pair<int, int>> ranges;
  for (int i = 0; i < chunks; ++i) ranges.emplace_back(n * i / chunks, n * (i + 1) / chunks);
  return ranges;
}

Gradients zero_gradients(const std::vector<LayerParams>& params) {
  Gradients g;
  g.layers.reserve(params.size());
  for (const LayerParams& p : params) g.layers.push_back({Tensor(p.weights.shape), Tensor(p.bias.shape), {}, {}});
  return g;
}

}  // namespace

Network::Network(NetworkSpec spec, std::vector<LayerParams> params, std::uint64_t seed)
    : spec_(std::move(spec)), params_(std::move(params)), seed_(seed) {
  spec_.validate();
  const std::vector<LayerParams> expected = allocate_params(spec_);
  if (expected.size() != params_.size()) {
    throw IncompatibleWeights("network: parameter layer count does not match spec");
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (expected[i].weights.shape != params_[i].weights.shape ||
        expected[i].bias.shape != params_[i].bias.shape ||
        expected[i].running_mean.shape != params_[i].running_mean.shape ||
        expected[i].running_var.shape != params_[i].running_var.shape) {
      throw IncompatibleWeights("network: parameter shapes do not match spec at slot " +
                                std::to_string(i));
    }
  }
}

Tensor Network::forward(const Tensor& batch) const {
  check_batch(spec_, batch);
  Tensor out(batch.n(), kNumHeads, 1, 1);
  const auto ranges = chunk_ranges(batch.n(), kGradChunks);
#pragma omp parallel for schedule(static)
  for (int ci = 0; ci < static_cast<int>(ranges.size()); ++ci) {
    const auto [b, e] = ranges[ci];
    int slot = 0;
    const Tensor y = detail::run_forward(spec_.layers, spec_.layers.size(), params_, slot,
                                         slice_batch(batch, b, e), nullptr);
    write_batch(out, y, b);
  }
  return out;
}

ActionVector Network::predict(const std::vector<double>& sample) const {
  Tensor t(1, spec_.input_channels, spec_.input_size, spec_.input_size);
  if (sample.size() != t.size()) throw InvalidShape("predict: sample size does not match input");
  t.data = sample;
  const Tensor y = forward(t);
  ActionVector a{};
  std::copy(y.data.begin(), y.data.end(), a.begin());
  return a;
}

Network build_network(const NetworkSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::vector<LayerParams> params = allocate_params(spec);
  std::mt19937_64 rng(seed);
  for (LayerParams& p : params) {
    if (!p.running_mean.data.empty()) continue;  // batchnorm: gamma 1, beta 0
    const double fan_in = static_cast<double>(p.weights.sample_size());
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
    for (double& v : p.weights.data) v = dist(rng);
  }
  return Network(spec, std::move(params), seed);
}

std::size_t count_params(const Network& net) {
  std::size_t n = 0;
  for (const LayerParams& p : net.params()) n += p.weights.size() + p.bias.size();
  return n;
}

double Gradients::norm() const {
  double s = 0.0;
  for (const LayerParams& p : layers) {
    for (double v : p.weights.data) s += v * v;
    for (double v : p.bias.data) s += v * v;
  }
  return std::sqrt(s);
}

BatchGradient backward(const Network& net, const Tensor& batch, const Tensor& targets) {
  const NetworkSpec& spec = net.spec();
  check_batch(spec, batch);
  if (targets.n() != batch.n() || targets.sample_size() != kNumHeads) {
    throw InvalidShape("backward: targets must be N x 5");
  }
  if (batch.n() == 0) throw InvalidInput("backward: empty batch");
  // Batch statistics must see the whole batch.
  const auto ranges = chunk_ranges(batch.n(), spec.has_batchnorm() ? 1 : kGradChunks);
  const std::size_t total = static_cast<std::size_t>(batch.n()) * kNumHeads;
  const std::size_t head = spec.layers.size() - 1;  // trailing sigmoid, fused into the loss

  std::vector<Gradients> partial(ranges.size());
  std::vector<double> loss_sum(ranges.size(), 0.0);
  std::vector<detail::Trace> traces(ranges.size());
#pragma omp parallel for schedule(static)
  for (int ci = 0; ci < static_cast<int>(ranges.size()); ++ci) {
    const auto [b, e] = ranges[ci];
    const Tensor x = slice_batch(batch, b, e);
    Tensor t = slice_batch(targets, b, e);
    t.shape = {e - b, kNumHeads, 1, 1};
    int slot = 0;
    const Tensor logits =
        detail::run_forward(spec.layers, head, net.params(), slot, x, &traces[ci]);
    const Tensor p = apply_activation(logits, Activation::kSigmoid);
    loss_sum[ci] = bce_loss(p, t) * static_cast<double>(p.size());
    partial[ci] = zero_gradients(net.params());
    detail::run_backward(spec.layers, head, net.params(), x, traces[ci],
                         bce_sigmoid_grad(p, t, total), partial[ci].layers, false);
  }

  BatchGradient out;
  out.grads = std::move(partial[0]);
  for (std::size_t ci = 1; ci < partial.size(); ++ci) {
    for (std::size_t s = 0; s < out.grads.layers.size(); ++s) {
      auto& dst = out.grads.layers[s];
      const auto& src = partial[ci].layers[s];
      for (std::size_t i = 0; i < dst.weights.size(); ++i) dst.weights.data[i] += src.weights.data[i];
      for (std::size_t i = 0; i < dst.bias.size(); ++i) dst.bias.data[i] += src.bias.data[i];
    }
  }
  double loss = 0.0;
  for (double v : loss_sum) loss += v;
  out.loss = loss / static_cast<double>(total);

  out.batch_stats.resize(net.params().size());
  if (spec.has_batchnorm()) {
    // Single chunk: collect the statistics recorded during the traced pass.
    struct Collector {
      std::vector<std::pair<Tensor, Tensor>>& dst;
      void collect(const std::vector<LayerSpec>& layers, const detail::Trace& tr) {
        for (std::size_t k = 0; k < tr.outs.size(); ++k) {
          if (layers[k].kind == LayerKind::kBatchNorm) dst[tr.slots[k]] = {tr.bn_mean[k], tr.bn_var[k]};
          for (std::size_t b = 0; b < tr.branches[k].size(); ++b) {
            collect(layers[k].branches[b], tr.branches[k][b]);
          }
        }
      }
    };
    Collector{out.batch_stats}.collect(spec.layers, traces[0]);
  }
  return out;
}

double evaluate_loss(const Network& net, const Tensor& batch, const Tensor& targets) {
  Tensor t = targets;
  t.shape = {targets.n(), kNumHeads, 1, 1};
  return bce_loss(net.forward(batch), t);
}

}  // namespace roadnav::nn
