#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>

#include "../support/generators.h"
#include "../support/oracles.h"
#include "doctest.h"
#include "roadnav/common/error.h"
#include "roadnav/nn/network.h"
#include "roadnav/nn/ops.h"
#include "roadnav/nn/train.h"
#include "roadnav/nn/weights_io.h"

using namespace roadnav;
using namespace roadnav::nn;
using roadnav::testing::Rng;

namespace {

Tensor random_tensor(Rng& rng, int n, int c, int h, int w, double lo = -1, double hi = 1) {
  Tensor t(n, c, h, w);
  for (double& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

// Direct cross-correlation with zero padding, one output cell at a time.
Tensor conv_oracle(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad) {
  const int kh = w.h(), kw = w.w();
  const int oh = (x.h() + 2 * pad - kh) / stride + 1, ow = (x.w() + 2 * pad - kw) / stride + 1;
  Tensor y(x.n(), w.n(), oh, ow);
  for (int n = 0; n < x.n(); ++n)
    for (int co = 0; co < w.n(); ++co)
      for (int i = 0; i < oh; ++i)
        for (int j = 0; j < ow; ++j) {
          double acc = b.at(0, co, 0, 0);
          for (int ci = 0; ci < x.c(); ++ci)
            for (int u = 0; u < kh; ++u)
              for (int v = 0; v < kw; ++v) {
                const int r = i * stride + u - pad, c = j * stride + v - pad;
                if (r >= 0 && r < x.h() && c >= 0 && c < x.w()) acc += w.at(co, ci, u, v) * x.at(n, ci, r, c);
              }
          y.at(n, co, i, j) = acc;
        }
  return y;
}

Tensor pool_oracle(const Tensor& x, int k, int stride, bool max) {
  const int oh = (x.h() - k) / stride + 1, ow = (x.w() - k) / stride + 1;
  Tensor y(x.n(), x.c(), oh, ow);
  for (int n = 0; n < x.n(); ++n)
    for (int c = 0; c < x.c(); ++c)
      for (int i = 0; i < oh; ++i)
        for (int j = 0; j < ow; ++j) {
          double acc = max ? -INFINITY : 0.0;
          for (int u = 0; u < k; ++u)
            for (int v = 0; v < k; ++v) {
              const double s = x.at(n, c, i * stride + u, j * stride + v);
              acc = max ? std::max(acc, s) : acc + s;
            }
          y.at(n, c, i, j) = max ? acc : acc / (k * k);
        }
  return y;
}

double max_diff(const Tensor& a, const Tensor& b) {
  REQUIRE(a.shape == b.shape);
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.data[k] - b.data[k]));
  return m;
}

NetworkSpec dense_spec(int in_features) {
  NetworkSpec s;
  s.input_size = 1;
  s.input_channels = in_features;
  s.layers = {LayerSpec::simple(LayerKind::kFlatten), LayerSpec::dense(kNumHeads),
              LayerSpec::simple(LayerKind::kSigmoid)};
  return s;
}

// Small spec with a frozen branch next to a trainable one.
NetworkSpec frozen_branch_spec() {
  NetworkSpec s;
  s.input_size = 8;
  LayerSpec frozen = LayerSpec::conv(2, 3, 1, 1);
  frozen.frozen = true;
  s.layers = {LayerSpec::concat({{frozen, LayerSpec::simple(LayerKind::kRelu)},
                                 {LayerSpec::conv(2, 1), LayerSpec::simple(LayerKind::kRelu)}}),
              LayerSpec::simple(LayerKind::kFlatten), LayerSpec::dense(kNumHeads),
              LayerSpec::simple(LayerKind::kSigmoid)};
  return s;
}

void walk_kernels(const std::vector<LayerSpec>& layers, const std::function<void(const LayerSpec&)>& f) {
  for (const LayerSpec& l : layers) {
    f(l);
    for (const auto& b : l.branches) walk_kernels(b, f);
  }
}

}  // namespace

TEST_CASE("conv2d identity, constant propagation and brute-force oracle") {
  Rng rng(1);
  const Tensor x = random_tensor(rng, 1, 1, 5, 5);
  CHECK(conv2d(x, Tensor(1, 1, 1, 1, 1.0), Tensor(1, 1, 1, 1), 1, 0) == x);

  const Tensor c(1, 1, 6, 6, 0.3);
  const Tensor avg = conv2d(c, Tensor(1, 1, 3, 3, 1.0 / 9.0), Tensor(1, 1, 1, 1), 1, 1);
  CHECK(avg.at(0, 0, 2, 3) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(avg.at(0, 0, 0, 0) == doctest::Approx(0.3 * 4.0 / 9.0).epsilon(1e-12));

  const Tensor in = random_tensor(rng, 1, 4, 6, 6);
  const Tensor w = random_tensor(rng, 8, 4, 3, 3);
  const Tensor b = random_tensor(rng, 1, 8, 1, 1);
  for (int stride : {1, 2}) {
    for (int pad : {0, 1}) {
      CHECK(max_diff(conv2d(in, w, b, stride, pad), conv_oracle(in, w, b, stride, pad)) < 1e-12);
    }
  }
}

TEST_CASE("pooling matches nested loops") {
  Tensor t(1, 1, 2, 2);
  t.data = {1, 2, 3, 4};
  CHECK(maxpool2d(t, 2, 2, 2).data == std::vector<double>{4});
  CHECK(maxpool2d(Tensor(1, 2, 4, 4, 0.7), 2, 2, 2) == Tensor(1, 2, 2, 2, 0.7));
  Rng rng(2);
  const Tensor x = random_tensor(rng, 2, 3, 9, 9);
  for (int k : {2, 3}) {
    for (int s : {1, 2}) {
      CHECK(maxpool2d(x, k, k, s) == pool_oracle(x, k, s, true));
      CHECK(max_diff(avgpool2d(x, k, k, s), pool_oracle(x, k, s, false)) < 1e-15);
    }
  }
}

TEST_CASE("activations") {
  Tensor t(1, 3, 1, 1);
  t.data = {-1, 0, 2};
  CHECK(apply_activation(t, Activation::kRelu).data == std::vector<double>{0, 0, 2});
  CHECK(apply_activation(Tensor(1, 1, 1, 1), Activation::kSigmoid).data[0] == 0.5);
  Rng rng(3);
  const Tensor x = random_tensor(rng, 3, 7, 2, 2, -30, 30);
  const Tensor y = apply_activation(x, Activation::kSoftmax);
  for (int n = 0; n < 3; ++n)
    for (int h = 0; h < 2; ++h)
      for (int w = 0; w < 2; ++w) {
        double s = 0.0;
        for (int c = 0; c < 7; ++c) s += y.at(n, c, h, w);
        CHECK(std::abs(s - 1.0) <= 1e-12);
      }
}

TEST_CASE("concat and split") {
  Rng rng(4);
  const Tensor a = random_tensor(rng, 1, 2, 4, 4), b = random_tensor(rng, 1, 3, 4, 4);
  const Tensor c = concat_channels({a, b});
  CHECK(c.shape == std::array<int, 4>{1, 5, 4, 4});
  CHECK(concat_channels({a}) == a);
  const auto parts = split_channels(c, {2, 3});
  CHECK(parts[0] == a);
  CHECK(parts[1] == b);
}

TEST_CASE("full preset structure") {
  const NetworkSpec full = full_preset();
  CHECK(full.weight_layer_count() == 39);
  const Network a = build_network(full, 7), b = build_network(full, 7);
  CHECK(a.params() == b.params());
  const std::size_t n = count_params(a);
  CHECK(n >= 4'800'000);
  CHECK(n <= 7'200'000);
  walk_kernels(full.layers, [](const LayerSpec& l) {
    CHECK(l.kernel_h <= 3);
    CHECK(l.kernel_w <= 3);
  });
}

TEST_CASE("specs with kernels larger than 3x3 are rejected") {
  NetworkSpec s = tiny_preset();
  s.layers[0] = LayerSpec::conv(8, 5, 2, 2);
  CHECK_THROWS_AS(build_network(s, 1), SpecViolation);
  NetworkSpec nested = tiny_preset();
  nested.layers[4].branches[1][2] = LayerSpec::conv(16, 5, 1, 2);
  CHECK_THROWS_AS(nested.validate(), SpecViolation);
  NetworkSpec pool = tiny_preset();
  pool.layers[5] = LayerSpec::maxpool(5, 2);
  CHECK_THROWS_AS(pool.validate(), SpecViolation);
}

TEST_CASE("spec JSON round trip and head validation") {
  const NetworkSpec t = tiny_preset();
  CHECK(NetworkSpec::from_json(t.to_json()) == t);
  NetworkSpec bad = t;
  bad.layers.pop_back();
  CHECK_THROWS_AS(bad.validate(), SpecViolation);
}

TEST_CASE("parameter counts") {
  CHECK(count_params(build_network(dense_spec(10), 1)) == 55);
  CHECK(count_params(build_network(tiny_preset(), 1)) < 50'000);
}

TEST_CASE("forward contract") {
  Rng rng(5);
  const Network net = build_network(tiny_preset(), 3);
  const Tensor x = random_tensor(rng, 4, 1, 32, 32, 0, 1);
  const Tensor y = net.forward(x);
  CHECK(y.shape == std::array<int, 4>{4, 5, 1, 1});
  for (double v : y.data) {
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK(net.forward(x) == y);

  Network zero = build_network(tiny_preset(), 3);
  for (LayerParams& p : zero.params()) {
    std::fill(p.weights.data.begin(), p.weights.data.end(), 0.0);
    std::fill(p.bias.data.begin(), p.bias.data.end(), 0.0);
  }
  for (double v : zero.forward(x).data) CHECK(v == 0.5);
}

TEST_CASE("binary cross-entropy") {
  Rng rng(6);
  Tensor t(3, 5, 1, 1);
  for (double& v : t.data) v = rng.coin() ? 1.0 : 0.0;
  CHECK(bce_loss(t, t) <= 1e-6);
  CHECK(std::abs(bce_loss(Tensor(3, 5, 1, 1, 0.5), t) - std::log(2.0)) <= 1e-12);
  const Tensor p = random_tensor(rng, 3, 5, 1, 1, 0, 1);
  double ref = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double q = std::clamp(p.data[k], kProbClamp, 1.0 - kProbClamp);
    ref -= t.data[k] * std::log(q) + (1.0 - t.data[k]) * std::log(1.0 - q);
  }
  CHECK(std::abs(bce_loss(p, t) - ref / p.size()) <= 1e-12);
}

TEST_CASE("backprop agrees with central differences on the tiny preset") {
  Network net = build_network(tiny_preset(), 11);
  const testing::GradientCheck g = testing::finite_difference_check(net, 3, 1e-5, 21, 13);
  CHECK(g.checked > 1000);
  CHECK(g.worst_rel < 1e-4);
}

TEST_CASE("backprop agrees with central differences through batchnorm and average pooling") {
  NetworkSpec s;
  s.input_size = 8;
  s.layers = {LayerSpec::conv(3, 3, 1, 1), LayerSpec::simple(LayerKind::kBatchNorm),
              LayerSpec::simple(LayerKind::kRelu), LayerSpec::avgpool(2, 2),
              LayerSpec::simple(LayerKind::kFlatten), LayerSpec::dense(kNumHeads),
              LayerSpec::simple(LayerKind::kSigmoid)};
  Network net = build_network(s, 5);
  // The conv bias feeding batchnorm has an identically zero gradient, so its
  // difference quotient is pure roundoff (about 1e-11); the floor sits above it.
  const testing::GradientCheck g = testing::finite_difference_check(net, 4, 1e-5, 8, 1, 1e-6);
  CHECK(g.worst_rel < 1e-4);
}

TEST_CASE("gradient vanishes at an exact minimum") {
  Network net = build_network(dense_spec(4), 2);
  Tensor x(2, 4, 1, 1, 0.0);
  Tensor t(2, 5, 1, 1);
  t.data = {1, 0, 1, 0, 0, 1, 0, 1, 0, 0};  // both samples share one target
  std::fill(net.params()[0].weights.data.begin(), net.params()[0].weights.data.end(), 0.0);
  // Saturated sigmoid: the clamped prediction equals the target.
  for (int h = 0; h < 5; ++h) net.params()[0].bias.data[h] = t.data[h] > 0 ? 40.0 : -40.0;
  const BatchGradient g = backward(net, x, t);
  CHECK(g.grads.norm() <= 1e-6);
}

TEST_CASE("frozen branch receives exactly zero gradient and no update") {
  Rng rng(7);
  Network net = build_network(frozen_branch_spec(), 4);
  const Tensor x = random_tensor(rng, 3, 1, 8, 8, 0, 1);
  Tensor t(3, 5, 1, 1);
  for (double& v : t.data) v = rng.coin();
  const BatchGradient g = backward(net, x, t);
  for (double v : g.grads.layers[0].weights.data) CHECK(v == 0.0);
  for (double v : g.grads.layers[0].bias.data) CHECK(v == 0.0);
  CHECK(g.grads.layers[1].weights.all_finite());
  const LayerParams before = net.params()[0];
  sgd_step(net, g.grads, 0.1, 0.9);
  CHECK(net.params()[0] == before);
}

TEST_CASE("a small SGD step does not increase the loss on its sample") {
  Rng rng(8);
  Network net = build_network(tiny_preset(), 9);
  const Tensor x = random_tensor(rng, 1, 1, 32, 32, 0, 1);
  Tensor t(1, 5, 1, 1);
  t.data = {1, 0, 1, 0, 1};
  const double before = evaluate_loss(net, x, t);
  const BatchGradient g = backward(net, x, t);
  sgd_step(net, g.grads, 1e-3, 0.0);
  CHECK(evaluate_loss(net, x, t) <= before);
}

namespace {

// Label = which half of the image is brighter; separable by one dense layer.
Dataset separable_set(int n, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  d.size = 32;
  for (int i = 0; i < n; ++i) {
    const bool left = rng.coin();
    std::vector<double> img(32 * 32);
    for (int r = 0; r < 32; ++r)
      for (int c = 0; c < 32; ++c) img[r * 32 + c] = ((c < 16) == left ? 0.8 : 0.2) + rng.uniform(-0.1, 0.1);
    const double y = left ? 1.0 : 0.0;
    d.add(img, {y, 1.0 - y, y, 0.0, 1.0 - y});
  }
  return d;
}

}  // namespace

TEST_CASE("tiny preset fits a separable set") {
  const Dataset d = separable_set(200, 12);
  Network net = build_network(tiny_preset(), 13);
  TrainHyper h;
  h.epochs = 50;
  h.lr = 0.05;
  double best = 0.0;
  const TrainReport rep = train(net, d, h, nullptr, [&](const EpochStats& e) {
    best = *std::min_element(e.head_accuracy.begin(), e.head_accuracy.end());
  });
  CHECK(rep.epochs.size() == 50);
  CHECK(best >= 0.99);
}

TEST_CASE("training is deterministic and resumable") {
  const Dataset d = separable_set(64, 14);
  TrainHyper h;
  h.epochs = 4;
  h.batch_size = 16;
  h.lr_decay = 0.9;
  Network a = build_network(tiny_preset(), 15), b = build_network(tiny_preset(), 15);
  train(a, d, h);
  train(b, d, h);
  CHECK(a.params() == b.params());

  Network c = build_network(tiny_preset(), 15);
  TrainState st = initial_train_state(h);
  TrainHyper first = h;
  first.epochs = 2;
  train_resumable(c, d, first, st);
  CHECK(st.epoch == 2);
  TrainState resumed = st;  // as if reloaded from a checkpoint
  train_resumable(c, d, h, resumed);
  CHECK(c.params() == a.params());
  CHECK(resumed.report.epochs.size() == 4);

  Network other = build_network(tiny_preset(), 16);
  train(other, d, h);
  CHECK_FALSE(other.params() == a.params());
}

TEST_CASE("weights round trip and error cases") {
  Rng rng(17);
  const Network net = build_network(tiny_preset(), 18);
  const testing::TempDir dir("weights");
  save_weights(net, dir / "w.mavw");
  const Network back = load_weights(dir / "w.mavw", tiny_preset());
  for (int i = 0; i < 10; ++i) {
    const Tensor x = random_tensor(rng, 1, 1, 32, 32, 0, 1);
    CHECK(back.forward(x) == net.forward(x));
  }
  CHECK_THROWS_AS(load_weights(dir / "w.mavw", full_preset()), IncompatibleWeights);
  std::string bytes = encode_weights(net);
  CHECK_THROWS_AS(decode_weights(bytes.substr(0, bytes.size() - 9), tiny_preset()), CorruptFile);
  bytes[0] = 'X';
  CHECK_THROWS_AS(decode_weights(bytes, tiny_preset()), CorruptFile);
}
