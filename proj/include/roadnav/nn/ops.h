#pragma once

#include <vector>

#include "roadnav/nn/tensor.h"

namespace roadnav::nn {

// Weights are Co x Ci x kh x kw, bias 1 x Co x 1 x 1. Cross-correlation with
// symmetric zero padding; output extent floor((in + 2p - k) / stride) + 1.
Tensor conv2d(const Tensor& in, const Tensor& weights, const Tensor& bias, int stride, int padding);

// Accumulates into dw and db. dx may be null when the input gradient is not needed.
void conv2d_backward(const Tensor& in, const Tensor& weights, const Tensor& dy, int stride,
                     int padding, Tensor* dx, Tensor& dw, Tensor& db);

// Padded cells are skipped: they never win a max and do not count in a mean.
Tensor maxpool2d(const Tensor& in, int kh, int kw, int stride, int padding = 0);
Tensor avgpool2d(const Tensor& in, int kh, int kw, int stride, int padding = 0);
// Max gradient routes to the first maximal cell of each window in scan order.
Tensor maxpool2d_backward(const Tensor& in, const Tensor& dy, int kh, int kw, int stride,
                          int padding = 0);
Tensor avgpool2d_backward(const Tensor& in, const Tensor& dy, int kh, int kw, int stride,
                          int padding = 0);

enum class Activation { kRelu, kSigmoid, kSoftmax };

// Softmax runs over the channel axis at every (n, h, w).
Tensor apply_activation(const Tensor& in, Activation kind);
// Takes the activation output y, not its input.
Tensor activation_backward(const Tensor& y, const Tensor& dy, Activation kind);

Tensor concat_channels(const std::vector<Tensor>& inputs);
std::vector<Tensor> split_channels(const Tensor& t, const std::vector<int>& channels);

// Flattens C x H x W per sample. Weights are Out x F x 1 x 1, bias 1 x Out x 1 x 1.
Tensor dense(const Tensor& in, const Tensor& weights, const Tensor& bias);
void dense_backward(const Tensor& in, const Tensor& weights, const Tensor& dy, Tensor* dx,
                    Tensor& dw, Tensor& db);

// Per-channel normalization over (N, H, W). Training mode uses batch
// statistics and reports them through batch_mean / batch_var.
struct BatchNormParams {
  const Tensor& gamma;
  const Tensor& beta;
  double eps = 1e-5;
};
Tensor batchnorm_infer(const Tensor& in, const BatchNormParams& p, const Tensor& running_mean,
                       const Tensor& running_var);
Tensor batchnorm_train(const Tensor& in, const BatchNormParams& p, Tensor& batch_mean,
                       Tensor& batch_var);
void batchnorm_backward(const Tensor& in, const BatchNormParams& p, const Tensor& batch_mean,
                        const Tensor& batch_var, const Tensor& dy, Tensor& dx, Tensor& dgamma,
                        Tensor& dbeta);

// Probabilities are clamped to [1e-7, 1 - 1e-7] before the logarithm.
inline constexpr double kProbClamp = 1e-7;

// Mean binary cross-entropy over every element of pred / target.
double bce_loss(const Tensor& pred, const Tensor& target);

// d(bce_loss)/d(logit) for sigmoid outputs: (p - t) / numel. `total` overrides
// numel when pred is one chunk of a larger batch.
Tensor bce_sigmoid_grad(const Tensor& pred, const Tensor& target, std::size_t total = 0);

}  // namespace roadnav::nn
