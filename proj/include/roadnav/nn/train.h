#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "roadnav/nn/network.h"

namespace roadnav::nn {

// Feature images with binary five-head targets. Features are stored as float
// to halve memory; batches are widened to double.
struct Dataset {
  int channels = 1;
  int size = 0;  // square side
  std::vector<float> features;
  std::vector<std::array<double, kNumHeads>> targets;

  std::size_t count() const { return targets.size(); }
  std::size_t sample_size() const { return static_cast<std::size_t>(channels) * size * size; }
  void add(const std::vector<double>& sample, const std::array<double, kNumHeads>& target);

  // Gathers the listed rows into an input batch and an N x 5 target tensor.
  Tensor batch(const std::vector<std::size_t>& rows) const;
  Tensor target_batch(const std::vector<std::size_t>& rows) const;
};

struct TrainHyper {
  int epochs = 10;
  int batch_size = 32;
  double lr = 0.01;
  double momentum = 0.9;
  double lr_decay = 1.0;  // multiplier applied after every epoch
  std::uint64_t shuffle_seed = 1;

  Json to_json() const;
  static TrainHyper from_json(const Json& j);
};

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;  // mean over the epoch's mini-batches, weighted by batch size
  std::array<double, kNumHeads> head_accuracy{};  // on the training set after the epoch
  double val_loss = -1.0;                         // -1 when no validation set was given
  std::array<double, kNumHeads> val_head_accuracy{};
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  Json to_json() const;
};

// v = momentum * v + g; w -= lr * v. Frozen layers are skipped.
class SgdMomentum {
 public:
  SgdMomentum(double lr, double momentum);
  void step(Network& net, const Gradients& grads);
  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }
  // Empty until the first step.
  const std::vector<LayerParams>& velocity() const { return velocity_; }
  void set_velocity(std::vector<LayerParams> v) { velocity_ = std::move(v); }

 private:
  double lr_, momentum_;
  std::vector<LayerParams> velocity_;
};

// Convenience single step with a fresh (zero) velocity.
void sgd_step(Network& net, const Gradients& grads, double lr, double momentum);

// Everything needed to continue training after a completed epoch.
struct TrainState {
  int epoch = 0;  // next epoch to run
  double lr = 0.0;
  std::vector<LayerParams> velocity;
  TrainReport report;
};

TrainState initial_train_state(const TrainHyper& hyper);

// Mini-batch SGD. Epoch e shuffles with a generator seeded from
// (shuffle_seed, e), so results depend only on (net, data, hyper).
TrainReport train(Network& net, const Dataset& data, const TrainHyper& hyper,
                  const Dataset* validation = nullptr,
                  const std::function<void(const EpochStats&)>& on_epoch = {});

// Runs epochs state.epoch .. hyper.epochs - 1, updating state after each.
// Resuming from a saved state reproduces the uninterrupted run exactly.
void train_resumable(Network& net, const Dataset& data, const TrainHyper& hyper, TrainState& state,
                     const Dataset* validation = nullptr,
                     const std::function<void(const EpochStats&, const TrainState&)>& on_epoch = {});

// Predictions for every sample, in order, computed in batches.
std::vector<ActionVector> predict_all(const Network& net, const Dataset& data, int batch_size = 64);

// Fraction of samples whose thresholded (0.5) head output equals the target.
std::array<double, kNumHeads> head_accuracy(const std::vector<ActionVector>& pred,
                                            const Dataset& data);

}  // namespace roadnav::nn
