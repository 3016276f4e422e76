#pragma once

#include <vector>

#include "roadnav/nn/network.h"

namespace roadnav::nn::detail {

// Per-sequence record of a training forward pass. outs[k] is the output of
// layer k; its input is the sequence input for k == 0, else outs[k - 1].
struct Trace {
  std::vector<Tensor> outs;
  std::vector<int> slots;                  // parameter slot per layer, -1 if none
  std::vector<std::vector<Trace>> branches;  // per layer, concat only
  std::vector<Tensor> bn_mean, bn_var;       // per layer, batchnorm only
};

// Assigns parameter slots in depth-first order; `visit(layer, slot)` is
// called for every layer that owns parameters.
template <typename F>
void for_each_param_layer(const std::vector<LayerSpec>& layers, int& slot, F&& visit) {
  for (const LayerSpec& l : layers) {
    if (l.has_weights() || l.kind == LayerKind::kBatchNorm) visit(l, slot++);
    for (const auto& b : l.branches) for_each_param_layer(b, slot, visit);
  }
}

// `trace` null selects inference mode. `slot` advances past every parameter
// layer in the sequence.
Tensor run_forward(const std::vector<LayerSpec>& layers, std::size_t count,
                   const std::vector<LayerParams>& params, int& slot, const Tensor& x,
                   Trace* trace);

// Backpropagates dy (gradient of the output of layer count - 1) through
// layers [0, count). Returns dx when need_dx is set, an empty tensor otherwise.
Tensor run_backward(const std::vector<LayerSpec>& layers, std::size_t count,
                    const std::vector<LayerParams>& params, const Tensor& x, const Trace& trace,
                    Tensor dy, std::vector<LayerParams>& grads, bool need_dx);

}  // namespace roadnav::nn::detail
