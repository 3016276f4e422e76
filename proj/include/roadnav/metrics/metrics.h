#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roadnav/common/json_util.h"
#include "roadnav/nn/network.h"

namespace roadnav::metrics {

enum class EvaForm { kResidual, kStandard };

// Population variance (divide by n) throughout.
double population_variance(std::span<const double> v);

// kResidual: Var[y_true - y_pred] / Var[y_true]; kStandard: one minus that.
// InvalidInput for unequal lengths or n < 2, UndefinedMetric when
// Var[y_true] == 0.
double eva(std::span<const double> y_true, std::span<const double> y_pred, EvaForm form);

struct ConfusionCounts {
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::int64_t total() const { return tp + fp + tn + fn; }
  Json to_json() const;
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

ConfusionCounts confusion(const std::vector<bool>& pred, const std::vector<bool>& truth);

inline constexpr double kDefaultBeta = 0.9;

// (1 + b^2) P R / (b^2 P + R). tp == 0 with any fp or fn gives 0;
// UndefinedMetric when tp + fp + fn == 0.
double f_measure(const ConfusionCounts& c, double beta = kDefaultBeta);
double f_measure_pr(double precision, double recall, double beta = kDefaultBeta);

// Sample Pearson correlation, clamped to [-1, 1]. UndefinedMetric when either
// series is constant.
double pearson_r(std::span<const double> x, std::span<const double> y);

double rmse(std::span<const double> y_true, std::span<const double> y_pred);

// InvalidInput when total() == 0.
double accuracy(const ConfusionCounts& c);
// 1 - accuracy, so the two always sum to exactly one.
double error_rate(const ConfusionCounts& c);

struct LatencyStats {
  int measured = 0;
  double mean_ms = 0.0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  double fps = 0.0;
  Json to_json() const;
};

// Open-loop evaluation of five-head predictions against binary targets.
// Headline accuracy and F are junction-only; the all-heads accuracy counts
// a frame as correct when every thresholded head matches.
struct MetricsReport {
  std::int64_t frames = 0;
  ConfusionCounts junction;
  std::optional<double> f_measure;  // absent when no junction is predicted or present
  double accuracy = 0.0;
  double accuracy_all_heads = 0.0;
  double action_agreement = 0.0;  // thresholded discrete action equal to the target's
  std::array<double, nn::kNumHeads> head_accuracy{};
  double rmse = 0.0;                      // all head probabilities vs targets
  std::optional<double> eva_residual;        // steering series p_left - p_right
  std::optional<double> eva_standard;
  std::array<std::optional<double>, nn::kNumHeads> pearson_r{};  // per head, absent when constant
  std::optional<double> pearson_steering;
  std::optional<LatencyStats> latency;
  int layers = 0;
  std::int64_t parameters = 0;

  Json to_json() const;
};

MetricsReport evaluate_predictions(const std::vector<nn::ActionVector>& pred,
                                   const std::vector<nn::ActionVector>& targets,
                                   double threshold = 0.5);

// Columns: F-Measure, Accuracy, RMSE, EVA (residual/standard), FPS, Layers, Parameters.
struct TableRow {
  std::string name;
  MetricsReport report;
};
std::string format_table(const std::vector<TableRow>& rows);

}  // namespace roadnav::metrics
