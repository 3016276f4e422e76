#include <utility>

#include "graph.h"
#include "roadnav/common/error.h"
#include "roadnav/nn/ops.h"

namespace roadnav::nn::detail {
namespace {

Activation activation_of(LayerKind kind) {
  switch (kind) {
    case LayerKind::kRelu:
      return Activation::kRelu;
    case LayerKind::kSigmoid:
      return Activation::kSigmoid;
    default:
      return Activation::kSoftmax;
  }
}

struct Window {
  int kh, kw, stride, pad;
};

Window pool_window(const LayerSpec& l, const Tensor& in) {
  if (l.global) return {in.h(), in.w(), 1, 0};
  return {l.kernel_h, l.kernel_w, l.stride, l.padding};
}

Tensor reshape(Tensor t, std::array<int, 4> shape) {
  t.shape = shape;
  return t;
}

}  // namespace

Tensor run_forward(const std::vector<LayerSpec>& layers, std::size_t count,
                   const std::vector<LayerParams>& params, int& slot, const Tensor& x,
                   Trace* trace) {
  if (trace != nullptr) {
    trace->outs.assign(count, Tensor());
    trace->slots.assign(count, -1);
    trace->branches.assign(count, {});
    trace->bn_mean.assign(count, Tensor());
    trace->bn_var.assign(count, Tensor());
  }
  Tensor cur;
  for (std::size_t k = 0; k < count; ++k) {
    const LayerSpec& l = layers[k];
    const Tensor& in = k == 0 ? x : (trace != nullptr ? trace->outs[k - 1] : cur);
    Tensor out;
    int s = -1;
    switch (l.kind) {
      case LayerKind::kConv:
        s = slot++;
        out = conv2d(in, params[s].weights, params[s].bias, l.stride, l.padding);
        break;
      case LayerKind::kDense:
        s = slot++;
        out = dense(in, params[s].weights, params[s].bias);
        break;
      case LayerKind::kBatchNorm: {
        s = slot++;
        const BatchNormParams bn{params[s].weights, params[s].bias};
        if (trace != nullptr) {
          out = batchnorm_train(in, bn, trace->bn_mean[k], trace->bn_var[k]);
        } else {
          out = batchnorm_infer(in, bn, params[s].running_mean, params[s].running_var);
        }
        break;
      }
      case LayerKind::kMaxPool: {
        const Window w = pool_window(l, in);
        out = maxpool2d(in, w.kh, w.kw, w.stride, w.pad);
        break;
      }
      case LayerKind::kAvgPool: {
        const Window w = pool_window(l, in);
        out = avgpool2d(in, w.kh, w.kw, w.stride, w.pad);
        break;
      }
      case LayerKind::kRelu:
      case LayerKind::kSigmoid:
      case LayerKind::kSoftmax:
        out = apply_activation(in, activation_of(l.kind));
        break;
      case LayerKind::kFlatten:
        out = reshape(in, {in.n(), static_cast<int>(in.sample_size()), 1, 1});
        break;
      case LayerKind::kConcat: {
        std::vector<Tensor> parts;
        if (trace != nullptr) trace->branches[k].resize(l.branches.size());
        for (std::size_t b = 0; b < l.branches.size(); ++b) {
          Trace* sub = trace != nullptr ? &trace->branches[k][b] : nullptr;
          parts.push_back(run_forward(l.branches[b], l.branches[b].size(), params, slot, in, sub));
        }
        out = concat_channels(parts);
        break;
      }
    }
    if (trace != nullptr) {
      trace->slots[k] = s;
      trace->outs[k] = std::move(out);
    } else {
      cur = std::move(out);
    }
  }
  if (count == 0) return x;
  return trace != nullptr ? trace->outs[count - 1] : cur;
}

Tensor run_backward(const std::vector<LayerSpec>& layers, std::size_t count,
                    const std::vector<LayerParams>& params, const Tensor& x, const Trace& trace,
                    Tensor dy, std::vector<LayerParams>& grads, bool need_dx) {
  for (std::size_t k = count; k-- > 0;) {
    const LayerSpec& l = layers[k];
    const Tensor& in = k == 0 ? x : trace.outs[k - 1];
    const bool need = k > 0 || need_dx;
    const int s = trace.slots[k];
    Tensor dx;
    switch (l.kind) {
      case LayerKind::kConv:
      case LayerKind::kDense: {
        const LayerParams& p = params[s];
        Tensor scratch_w, scratch_b;
        Tensor* dw = &grads[s].weights;
        Tensor* db = &grads[s].bias;
        if (l.frozen) {
          if (!need) break;
          scratch_w = Tensor(p.weights.shape);
          scratch_b = Tensor(p.bias.shape);
          dw = &scratch_w;
          db = &scratch_b;
        }
        if (l.kind == LayerKind::kConv) {
          conv2d_backward(in, p.weights, dy, l.stride, l.padding, need ? &dx : nullptr, *dw, *db);
        } else {
          dense_backward(in, p.weights, dy, need ? &dx : nullptr, *dw, *db);
        }
        break;
      }
      case LayerKind::kBatchNorm: {
        const BatchNormParams bn{params[s].weights, params[s].bias};
        batchnorm_backward(in, bn, trace.bn_mean[k], trace.bn_var[k], dy, dx, grads[s].weights,
                           grads[s].bias);
        break;
      }
      case LayerKind::kMaxPool: {
        if (!need) break;
        const Window w = pool_window(l, in);
        dx = maxpool2d_backward(in, dy, w.kh, w.kw, w.stride, w.pad);
        break;
      }
      case LayerKind::kAvgPool: {
        if (!need) break;
        const Window w = pool_window(l, in);
        dx = avgpool2d_backward(in, dy, w.kh, w.kw, w.stride, w.pad);
        break;
      }
      case LayerKind::kRelu:
      case LayerKind::kSigmoid:
      case LayerKind::kSoftmax:
        if (!need) break;
        dx = activation_backward(trace.outs[k], dy, activation_of(l.kind));
        break;
      case LayerKind::kFlatten:
        dx = reshape(std::move(dy), in.shape);
        break;
      case LayerKind::kConcat: {
        const auto& subs = trace.branches[k];
        std::vector<int> channels;
        for (const Trace& t : subs) channels.push_back(t.outs.back().c());
        std::vector<Tensor> parts = split_channels(dy, channels);
        dx = Tensor(in.shape);
        for (std::size_t b = 0; b < l.branches.size(); ++b) {
          const Tensor db = run_backward(l.branches[b], l.branches[b].size(), params, in, subs[b],
                                         std::move(parts[b]), grads, true);
          for (std::size_t i = 0; i < dx.size(); ++i) dx.data[i] += db.data[i];
        }
        break;
      }
    }
    dy = std::move(dx);
  }
  return need_dx ? dy : Tensor();
}

}  // namespace roadnav::nn::detail
