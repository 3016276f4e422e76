#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "roadnav/nn/spec.h"
#include "roadnav/nn/tensor.h"

namespace roadnav::nn {

// p_forward, p_yaw_left, p_yaw_right, p_halt, p_junction.
using ActionVector = std::array<double, kNumHeads>;
enum Head { kForward = 0, kYawLeft = 1, kYawRight = 2, kHalt = 3, kJunction = 4 };

// Trainable tensors of one conv / dense / batchnorm layer. For batchnorm,
// weights and bias hold gamma and beta, and the running statistics are
// buffers that are saved but never differentiated.
struct LayerParams {
  Tensor weights;
  Tensor bias;
  Tensor running_mean;
  Tensor running_var;

  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

class Network {
 public:
  Network(NetworkSpec spec, std::vector<LayerParams> params, std::uint64_t seed);

  const NetworkSpec& spec() const { return spec_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<LayerParams>& params() const { return params_; }
  std::vector<LayerParams>& params() { return params_; }

  // Batch N x C x S x S with S = input_size. Returns N x 5 x 1 x 1.
  // Inference mode: batchnorm uses running statistics. Safe to call
  // concurrently on a shared network.
  Tensor forward(const Tensor& batch) const;

  // One sample, C x S x S values in row-major order.
  ActionVector predict(const std::vector<double>& sample) const;

 private:
  NetworkSpec spec_;
  std::vector<LayerParams> params_;
  std::uint64_t seed_;
};

// He-normal weights (std sqrt(2 / fan_in)) from a 64-bit Mersenne twister,
// zero biases, unit batchnorm scale.
Network build_network(const NetworkSpec& spec, std::uint64_t seed);

// Trainable scalars: weights, biases, batchnorm gamma and beta.
std::size_t count_params(const Network& net);

struct Gradients {
  // Same slots as Network::params(); only weights and bias are populated.
  std::vector<LayerParams> layers;

  double norm() const;
};

struct BatchGradient {
  double loss = 0.0;
  Gradients grads;
  // Per parameter slot: batch mean / variance for batchnorm layers, empty otherwise.
  std::vector<std::pair<Tensor, Tensor>> batch_stats;
};

// Mean BCE over the batch and its gradient for every parameter. Frozen layers
// get exact zeros. The batch is split into a fixed number of chunks that run
// in parallel; their gradients are summed in chunk order, so the result does
// not depend on the thread count.
BatchGradient backward(const Network& net, const Tensor& batch, const Tensor& targets);

// Mean BCE of net.forward(batch).
double evaluate_loss(const Network& net, const Tensor& batch, const Tensor& targets);

}  // namespace roadnav::nn
