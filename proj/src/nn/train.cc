#include "roadnav/nn/train.h"

#include <algorithm>
#include <numeric>
#include <random>

#include "roadnav/common/error.h"
#include "roadnav/nn/ops.h"

namespace roadnav::nn {

void Dataset::add(const std::vector<double>& sample, const std::array<double, kNumHeads>& target) {
  if (sample.size() != sample_size()) throw InvalidShape("dataset: sample size mismatch");
  features.insert(features.end(), sample.begin(), sample.end());
  targets.push_back(target);
}

Tensor Dataset::batch(const std::vector<std::size_t>& rows) const {
  Tensor t(static_cast<int>(rows.size()), channels, size, size);
  const std::size_t n = sample_size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= count()) throw InvalidInput("dataset: row out of range");
    const float* src = features.data() + rows[i] * n;
    std::copy(src, src + n, t.sample(static_cast<int>(i)));
  }
  return t;
}

Tensor Dataset::target_batch(const std::vector<std::size_t>& rows) const {
  Tensor t(static_cast<int>(rows.size()), kNumHeads, 1, 1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(targets[rows[i]].begin(), targets[rows[i]].end(), t.sample(static_cast<int>(i)));
  }
  return t;
}

Json TrainHyper::to_json() const {
  return Json{{"epochs", epochs},       {"batch_size", batch_size}, {"lr", lr},
              {"momentum", momentum},   {"lr_decay", lr_decay},     {"shuffle_seed", shuffle_seed}};
}

TrainHyper TrainHyper::from_json(const Json& j) {
  reject_unknown_keys(j, {"epochs", "batch_size", "lr", "momentum", "lr_decay", "shuffle_seed"},
                      "train");
  TrainHyper h;
  h.epochs = j.value("epochs", h.epochs);
  h.batch_size = j.value("batch_size", h.batch_size);
  h.lr = j.value("lr", h.lr);
  h.momentum = j.value("momentum", h.momentum);
  h.lr_decay = j.value("lr_decay", h.lr_decay);
  h.shuffle_seed = j.value("shuffle_seed", h.shuffle_seed);
  if (h.epochs < 0 || h.batch_size < 1) throw InvalidInput("train: bad epochs / batch_size");
  if (!(h.lr > 0)) throw InvalidInput("train: lr must be > 0");
  if (h.momentum < 0 || h.momentum >= 1) throw InvalidInput("train: momentum must be in [0, 1)");
  return h;
}

Json TrainReport::to_json() const {
  Json arr = Json::array();
  for (const EpochStats& e : epochs) {
    Json j{{"epoch", e.epoch}, {"loss", e.loss}, {"head_accuracy", e.head_accuracy}};
    if (e.val_loss >= 0) {
      j["val_loss"] = e.val_loss;
      j["val_head_accuracy"] = e.val_head_accuracy;
    }
    arr.push_back(j);
  }
  return Json{{"epochs", arr}};
}

SgdMomentum::SgdMomentum(double lr, double momentum) : lr_(lr), momentum_(momentum) {
  if (!(lr > 0)) throw InvalidInput("sgd: lr must be > 0");
}

namespace {

// Frozen flags in parameter-slot order.
void collect_frozen(const std::vector<LayerSpec>& layers, std::vector<bool>& out) {
  for (const LayerSpec& l : layers) {
    if (l.has_weights() || l.kind == LayerKind::kBatchNorm) out.push_back(l.frozen);
    for (const auto& b : l.branches) collect_frozen(b, out);
  }
}

void update(Tensor& w, Tensor& v, const Tensor& g, double lr, double mu) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    v.data[i] = mu * v.data[i] + g.data[i];
    w.data[i] -= lr * v.data[i];
  }
}

}  // namespace

void SgdMomentum::step(Network& net, const Gradients& grads) {
  auto& params = net.params();
  if (grads.layers.size() != params.size()) throw InvalidShape("sgd: gradient slot mismatch");
  if (velocity_.empty()) {
    for (const LayerParams& p : params) {
      velocity_.push_back({Tensor(p.weights.shape), Tensor(p.bias.shape), {}, {}});
    }
  }
  std::vector<bool> frozen;
  collect_frozen(net.spec().layers, frozen);
  for (std::size_t s = 0; s < params.size(); ++s) {
    if (frozen[s]) continue;
    update(params[s].weights, velocity_[s].weights, grads.layers[s].weights, lr_, momentum_);
    update(params[s].bias, velocity_[s].bias, grads.layers[s].bias, lr_, momentum_);
  }
}

void sgd_step(Network& net, const Gradients& grads, double lr, double momentum) {
  SgdMomentum opt(lr, momentum);
  opt.step(net, grads);
}

std::vector<ActionVector> predict_all(const Network& net, const Dataset& data, int batch_size) {
  std::vector<ActionVector> out;
  out.reserve(data.count());
  for (std::size_t b = 0; b < data.count(); b += batch_size) {
    std::vector<std::size_t> rows;
    for (std::size_t i = b; i < std::min(data.count(), b + batch_size); ++i) rows.push_back(i);
    const Tensor y = net.forward(data.batch(rows));
    for (int i = 0; i < y.n(); ++i) {
      ActionVector a{};
      std::copy(y.sample(i), y.sample(i) + kNumHeads, a.begin());
      out.push_back(a);
    }
  }
  return out;
}

std::array<double, kNumHeads> head_accuracy(const std::vector<ActionVector>& pred,
                                            const Dataset& data) {
  if (pred.size() != data.count()) throw InvalidShape("head_accuracy: size mismatch");
  std::array<double, kNumHeads> acc{};
  if (pred.empty()) return acc;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (int h = 0; h < kNumHeads; ++h) {
      if ((pred[i][h] >= 0.5) == (data.targets[i][h] >= 0.5)) acc[h] += 1.0;
    }
  }
  for (double& a : acc) a /= static_cast<double>(pred.size());
  return acc;
}

namespace {

double dataset_loss(const std::vector<ActionVector>& pred, const Dataset& data) {
  Tensor p(static_cast<int>(pred.size()), kNumHeads, 1, 1);
  Tensor t(p.shape);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    std::copy(pred[i].begin(), pred[i].end(), p.sample(static_cast<int>(i)));
    std::copy(data.targets[i].begin(), data.targets[i].end(), t.sample(static_cast<int>(i)));
  }
  return bce_loss(p, t);
}

}  // namespace

TrainState initial_train_state(const TrainHyper& hyper) {
  TrainState st;
  st.lr = hyper.lr;
  return st;
}

TrainReport train(Network& net, const Dataset& data, const TrainHyper& hyper,
                  const Dataset* validation, const std::function<void(const EpochStats&)>& on_epoch) {
  TrainState st = initial_train_state(hyper);
  train_resumable(net, data, hyper, st, validation, [&](const EpochStats& e, const TrainState&) {
    if (on_epoch) on_epoch(e);
  });
  return st.report;
}

void train_resumable(Network& net, const Dataset& data, const TrainHyper& hyper, TrainState& state,
                     const Dataset* validation,
                     const std::function<void(const EpochStats&, const TrainState&)>& on_epoch) {
  if (data.count() == 0) throw InvalidInput("train: empty dataset");
  if (hyper.batch_size < 1) throw InvalidInput("train: batch_size must be >= 1");
  if (state.epoch < 0) throw InvalidInput("train: negative resume epoch");
  SgdMomentum opt(state.lr, hyper.momentum);
  if (!state.velocity.empty()) {
    if (state.velocity.size() != net.params().size()) throw IncompatibleWeights("train: velocity slot mismatch");
    opt.set_velocity(state.velocity);
  }
  std::vector<bool> frozen;
  collect_frozen(net.spec().layers, frozen);
  std::vector<std::size_t> order(data.count());
  for (int epoch = state.epoch; epoch < hyper.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::seed_seq seq{static_cast<std::uint32_t>(hyper.shuffle_seed),
                      static_cast<std::uint32_t>(hyper.shuffle_seed >> 32),
                      static_cast<std::uint32_t>(epoch)};
    std::mt19937_64 rng(seq);
    std::shuffle(order.begin(), order.end(), rng);

    double loss_acc = 0.0;
    for (std::size_t b = 0; b < order.size(); b += hyper.batch_size) {
      const std::vector<std::size_t> rows(order.begin() + b,
                                          order.begin() + std::min(order.size(), b + hyper.batch_size));
      BatchGradient g = backward(net, data.batch(rows), data.target_batch(rows));
      loss_acc += g.loss * static_cast<double>(rows.size());
      opt.step(net, g.grads);
      for (std::size_t s = 0; s < g.batch_stats.size(); ++s) {
        if (g.batch_stats[s].first.data.empty() || frozen[s]) continue;
        LayerParams& p = net.params()[s];
        for (std::size_t i = 0; i < p.running_mean.size(); ++i) {
          p.running_mean.data[i] = 0.9 * p.running_mean.data[i] + 0.1 * g.batch_stats[s].first.data[i];
          p.running_var.data[i] = 0.9 * p.running_var.data[i] + 0.1 * g.batch_stats[s].second.data[i];
        }
      }
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.loss = loss_acc / static_cast<double>(order.size());
    stats.head_accuracy = head_accuracy(predict_all(net, data), data);
    if (validation != nullptr && validation->count() > 0) {
      const auto vp = predict_all(net, *validation);
      stats.val_loss = dataset_loss(vp, *validation);
      stats.val_head_accuracy = head_accuracy(vp, *validation);
    }
    opt.set_lr(opt.lr() * hyper.lr_decay);
    state.epoch = epoch + 1;
    state.lr = opt.lr();
    state.velocity = opt.velocity();
    state.report.epochs.push_back(stats);
    if (on_epoch) on_epoch(stats, state);
  }
}

}  // namespace roadnav::nn
