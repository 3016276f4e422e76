#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "generators.h"
#include "roadnav/common/error.h"
#include "roadnav/metrics/benchmark.h"
#include "roadnav/metrics/metrics.h"

using namespace roadnav;
using namespace roadnav::metrics;
using roadnav::testing::Rng;

namespace {

std::vector<double> affine(const std::vector<double>& v, double a, double b) {
  std::vector<double> out;
  for (double x : v) out.push_back(a * x + b);
  return out;
}

}  // namespace

TEST_CASE("eva examples") {
  const std::vector<double> y{0, 1, 2, 3};
  CHECK(eva(y, y, EvaForm::kResidual) == 0.0);
  CHECK(eva(y, y, EvaForm::kStandard) == 1.0);
  const std::vector<double> mean(4, 1.5);
  CHECK(eva(y, mean, EvaForm::kResidual) == doctest::Approx(1.0).epsilon(1e-15));
  const std::vector<double> p{0, 1, 2, 4};
  // (3/16) / (5/4) with population variance.
  CHECK(eva(y, p, EvaForm::kResidual) == doctest::Approx(0.15).epsilon(1e-14));
  CHECK(population_variance(y) == 1.25);
}

TEST_CASE("eva errors") {
  const std::vector<double> flat{2, 2, 2};
  const std::vector<double> other{1, 2, 3};
  CHECK_THROWS_AS(eva(flat, other, EvaForm::kResidual), UndefinedMetric);
  CHECK_THROWS_AS(eva(other, std::vector<double>{1, 2}, EvaForm::kResidual), InvalidInput);
  CHECK_THROWS_AS(eva(std::vector<double>{1}, std::vector<double>{1}, EvaForm::kResidual), InvalidInput);
}

TEST_CASE("eva forms sum to one on random series") {
  Rng rng(3);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = rng.integer(2, 60);
    const std::vector<double> a = roadnav::testing::random_series(rng, n);
    const std::vector<double> b = roadnav::testing::random_series(rng, n);
    REQUIRE(eva(a, b, EvaForm::kResidual) + eva(a, b, EvaForm::kStandard) == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("f_measure examples") {
  CHECK(f_measure(ConfusionCounts{90, 10, 0, 10}) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(f_measure(ConfusionCounts{0, 0, 5, 7}) == 0.0);
  CHECK(f_measure(ConfusionCounts{0, 3, 5, 0}) == 0.0);
  CHECK_THROWS_AS(f_measure(ConfusionCounts{0, 0, 10, 0}), UndefinedMetric);
  for (double p : {0.1, 0.37, 0.5, 0.99}) {
    for (double beta : {0.5, 0.9, 1.0, 2.0}) CHECK(f_measure_pr(p, p, beta) == doctest::Approx(p).epsilon(1e-14));
  }
}

TEST_CASE("f_measure bounds and asymmetry") {
  Rng rng(4);
  int asymmetric = 0;
  for (int t = 0; t < 2000; ++t) {
    const double p = rng.uniform(0.01, 1.0), r = rng.uniform(0.01, 1.0);
    const double f = f_measure_pr(p, r);
    REQUIRE(f >= 0.0);
    REQUIRE(f <= 1.0);
    REQUIRE(f_measure_pr(p, r, 1.0) == doctest::Approx(f_measure_pr(r, p, 1.0)).epsilon(1e-14));
    if (std::abs(p - r) > 0.05 && std::abs(f - f_measure_pr(r, p)) > 1e-6) ++asymmetric;
  }
  CHECK(asymmetric > 1000);
  CHECK(f_measure_pr(0.9, 0.5) != doctest::Approx(f_measure_pr(0.5, 0.9)));
}

TEST_CASE("pearson_r examples and invariances") {
  const std::vector<double> x{1, 2, 3};
  CHECK(pearson_r(x, x) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pearson_r(x, affine(x, -1.0, 0.0)) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(std::abs(pearson_r(x, std::vector<double>{1, 2, 4}) - 0.98198) < 1e-5);
  CHECK_THROWS_AS(pearson_r(x, std::vector<double>{5, 5, 5}), UndefinedMetric);

  Rng rng(5);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = rng.integer(3, 50);
    const std::vector<double> a = roadnav::testing::random_series(rng, n);
    const std::vector<double> b = roadnav::testing::random_series(rng, n);
    const double r = pearson_r(a, b);
    REQUIRE(r >= -1.0);
    REQUIRE(r <= 1.0);
    const double k = rng.uniform(0.1, 10.0), c = rng.uniform(-5.0, 5.0);
    REQUIRE(std::abs(pearson_r(affine(a, k, c), b) - r) < 1e-12);
    REQUIRE(std::abs(pearson_r(a, affine(b, k, c)) - r) < 1e-12);
    REQUIRE(std::abs(pearson_r(affine(a, -1.0, 0.0), b) + r) < 1e-12);
  }
}

TEST_CASE("rmse, confusion and accuracy") {
  CHECK(rmse(std::vector<double>{0, 0}, std::vector<double>{3, 4}) == doctest::Approx(3.5355339059).epsilon(1e-10));
  CHECK(rmse(std::vector<double>{1, 2}, std::vector<double>{1, 2}) == 0.0);
  CHECK_THROWS_AS(rmse(std::vector<double>{}, std::vector<double>{}), InvalidInput);

  const std::vector<bool> truth{true, false, true, false};
  CHECK(accuracy(confusion(truth, truth)) == 1.0);
  const std::vector<bool> flipped{false, true, false, true};
  CHECK(accuracy(confusion(flipped, truth)) == 0.0);
  CHECK(confusion({true, true, false, false}, {true, false, true, false}) == ConfusionCounts{1, 1, 1, 1});
  CHECK_THROWS_AS(confusion({}, {}), InvalidInput);
  CHECK_THROWS_AS(confusion({true}, {true, false}), InvalidInput);
  CHECK_THROWS_AS(accuracy(ConfusionCounts{}), InvalidInput);

  Rng rng(6);
  for (int t = 0; t < 1000; ++t) {
    const ConfusionCounts c{rng.integer(0, 50), rng.integer(0, 50), rng.integer(0, 50), rng.integer(1, 50)};
    REQUIRE(accuracy(c) + error_rate(c) == 1.0);
  }
}

TEST_CASE("evaluate_predictions is order independent") {
  Rng rng(7);
  std::vector<nn::ActionVector> pred, truth;
  for (int i = 0; i < 200; ++i) {
    pred.push_back(roadnav::testing::random_action_vector(rng));
    nn::ActionVector t{};
    for (double& v : t) v = rng.coin() ? 1.0 : 0.0;
    truth.push_back(t);
  }
  const Json a = evaluate_predictions(pred, truth).to_json();
  std::vector<std::size_t> idx(pred.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng.engine());
  std::vector<nn::ActionVector> p2, t2;
  for (std::size_t i : idx) {
    p2.push_back(pred[i]);
    t2.push_back(truth[i]);
  }
  const Json b = evaluate_predictions(p2, t2).to_json();
  // Sums reorder, so compare numerically rather than bitwise.
  for (auto it = a.begin(); it != a.end(); ++it) {
    if (it->is_number_float()) {
      CHECK(it->get<double>() == doctest::Approx(b[it.key()].get<double>()).epsilon(1e-12));
    } else if (!it->is_array() && !it->is_object()) {
      CHECK(*it == b[it.key()]);
    }
  }
}

TEST_CASE("evaluate_predictions on a perfect model") {
  std::vector<nn::ActionVector> truth{{1, 0, 0, 0, 0}, {1, 0, 1, 0, 1}, {0, 0, 0, 1, 0}, {1, 1, 0, 0, 1}};
  const MetricsReport r = evaluate_predictions(truth, truth);
  CHECK(r.frames == 4);
  CHECK(r.accuracy == 1.0);
  CHECK(r.accuracy_all_heads == 1.0);
  CHECK(r.action_agreement == 1.0);
  REQUIRE(r.f_measure.has_value());
  CHECK(*r.f_measure == 1.0);
  CHECK(r.rmse == 0.0);
  CHECK(r.junction == ConfusionCounts{2, 0, 2, 0});
  CHECK(format_table({{"perfect", r}}).find("perfect") != std::string::npos);
}

TEST_CASE("fps_benchmark contract") {
  std::vector<tomo::Image> frames(5, tomo::Image(100, 100));
  const LatencyStats s = fps_benchmark([](const tomo::Image&) {}, frames, 10);
  CHECK(s.measured >= kMinMeasured);
  CHECK(std::isfinite(s.fps));
  CHECK(s.fps > 0.0);
  CHECK(s.p50_ms <= s.p95_ms);
  CHECK_THROWS_AS(fps_benchmark([](const tomo::Image&) {}, {}, 10), InvalidInput);
  CHECK_THROWS_AS(fps_benchmark([](const tomo::Image&) {}, frames, -1), InvalidInput);
}

TEST_CASE("fps_benchmark mean latency is stationary when the frame list doubles") {
  // Fixed arithmetic per call, large enough to dwarf timer overhead.
  volatile double sink = 0.0;
  auto work = [&](const tomo::Image& img) {
    double acc = 0.0;
    for (int rep = 0; rep < 40; ++rep) {
      for (double v : img.data) acc += std::sqrt(v + rep);
    }
    sink = acc;
  };
  Rng rng(8);
  std::vector<tomo::Image> frames;
  for (int i = 0; i < 40; ++i) frames.push_back(roadnav::testing::random_image(rng, 100, 100));
  std::vector<tomo::Image> doubled = frames;
  doubled.insert(doubled.end(), frames.begin(), frames.end());
  const LatencyStats a = fps_benchmark(work, frames, 10);
  const LatencyStats b = fps_benchmark(work, doubled, 10);
  CHECK(b.measured == 2 * a.measured);
  CHECK(std::abs(b.mean_ms - a.mean_ms) <= 0.2 * a.mean_ms);
}

TEST_CASE("percentile is nearest rank") {
  CHECK(percentile({5, 1, 3, 2, 4}, 50) == 3);
  CHECK(percentile({5, 1, 3, 2, 4}, 100) == 5);
  CHECK(percentile({5, 1, 3, 2, 4}, 0) == 1);
}

TEST_CASE("random predictor on a balanced junction set is near chance") {
  // 10k Bernoulli(0.5) agreements: sd 0.005, so 0.05 is ten standard deviations.
  Rng rng(10);
  std::vector<nn::ActionVector> pred, truth;
  for (int i = 0; i < 10000; ++i) {
    pred.push_back(roadnav::testing::random_action_vector(rng));
    nn::ActionVector t{1, 0, 0, 0, i % 2 == 0 ? 1.0 : 0.0};
    truth.push_back(t);
  }
  CHECK(std::abs(evaluate_predictions(pred, truth).accuracy - 0.5) <= 0.05);
}
