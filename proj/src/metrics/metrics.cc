#include "roadnav/metrics/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "roadnav/common/error.h"
#include "roadnav/navigation/navigation.h"

namespace roadnav::metrics {
namespace {

void require_pair(std::span<const double> a, std::span<const double> b, std::size_t min_n,
                  const char* what) {
  if (a.size() != b.size()) throw InvalidInput(std::string(what) + ": series lengths differ");
  if (a.size() < min_n) {
    throw InvalidInput(std::string(what) + ": need at least " + std::to_string(min_n) + " samples");
  }
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

double population_variance(std::span<const double> v) {
  if (v.empty()) throw InvalidInput("variance: empty series");
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

double eva(std::span<const double> y_true, std::span<const double> y_pred, EvaForm form) {
  require_pair(y_true, y_pred, 2, "eva");
  const double var_true = population_variance(y_true);
  if (!(var_true > 0.0)) throw UndefinedMetric("eva: y_true has zero variance");
  std::vector<double> resid(y_true.size());
  for (std::size_t i = 0; i < resid.size(); ++i) resid[i] = y_true[i] - y_pred[i];
  const double ratio = population_variance(resid) / var_true;
  return form == EvaForm::kResidual ? ratio : 1.0 - ratio;
}

Json ConfusionCounts::to_json() const { return Json{{"tp", tp}, {"fp", fp}, {"tn", tn}, {"fn", fn}}; }

ConfusionCounts confusion(const std::vector<bool>& pred, const std::vector<bool>& truth) {
  if (pred.size() != truth.size()) throw InvalidInput("confusion: lengths differ");
  if (pred.empty()) throw InvalidInput("confusion: empty input");
  ConfusionCounts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] && truth[i]) ++c.tp;
    else if (pred[i]) ++c.fp;
    else if (truth[i]) ++c.fn;
    else ++c.tn;
  }
  return c;
}

double f_measure_pr(double precision, double recall, double beta) {
  if (!(beta > 0)) throw InvalidInput("f_measure: beta must be positive");
  if (precision < 0 || precision > 1 || recall < 0 || recall > 1) {
    throw InvalidInput("f_measure: precision and recall must lie in [0, 1]");
  }
  const double b2 = beta * beta;
  const double den = b2 * precision + recall;
  if (den == 0.0) return 0.0;
  return (1.0 + b2) * precision * recall / den;
}

double f_measure(const ConfusionCounts& c, double beta) {
  if (c.tp < 0 || c.fp < 0 || c.tn < 0 || c.fn < 0) throw InvalidInput("f_measure: negative count");
  if (c.tp + c.fp + c.fn == 0) throw UndefinedMetric("f_measure: no positives predicted or present");
  if (c.tp == 0) return 0.0;
  const double p = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  const double r = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  return f_measure_pr(p, r, beta);
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
  require_pair(x, y, 2, "pearson_r");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw UndefinedMetric("pearson_r: constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double rmse(std::span<const double> y_true, std::span<const double> y_pred) {
  require_pair(y_true, y_pred, 1, "rmse");
  double s = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) s += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
  return std::sqrt(s / static_cast<double>(y_true.size()));
}

double accuracy(const ConfusionCounts& c) {
  if (c.total() <= 0) throw InvalidInput("accuracy: empty counts");
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

double error_rate(const ConfusionCounts& c) { return 1.0 - accuracy(c); }

Json LatencyStats::to_json() const {
  return Json{{"measured", measured}, {"mean_ms", mean_ms}, {"p50_ms", p50_ms}, {"p95_ms", p95_ms}, {"fps", fps}};
}

Json MetricsReport::to_json() const {
  Json pr = Json::array();
  for (const auto& r : pearson_r) pr.push_back(optional_json(r));
  Json j{{"frames", frames},
         {"junction_confusion", junction.to_json()},
         {"f_measure", optional_json(f_measure)},
         {"accuracy", accuracy},
         {"accuracy_all_heads", accuracy_all_heads},
         {"action_agreement", action_agreement},
         {"head_accuracy", head_accuracy},
         {"rmse", rmse},
         {"eva_residual", optional_json(eva_residual)},
         {"eva_standard", optional_json(eva_standard)},
         {"pearson_r", pr},
         {"pearson_r_steering", optional_json(pearson_steering)},
         {"layers", layers},
         {"parameters", parameters}};
  if (latency) {
    j["latency"] = latency->to_json();
    j["fps"] = latency->fps;
  }
  return j;
}

MetricsReport evaluate_predictions(const std::vector<nn::ActionVector>& pred,
                                   const std::vector<nn::ActionVector>& targets, double threshold) {
  if (pred.size() != targets.size()) throw InvalidInput("evaluate: prediction and target counts differ");
  if (pred.empty()) throw InvalidInput("evaluate: empty input");
  const std::size_t n = pred.size();
  MetricsReport rep;
  rep.frames = static_cast<std::int64_t>(n);

  std::vector<bool> pj(n), tj(n);
  std::int64_t all_ok = 0, agree = 0;
  std::array<std::int64_t, nn::kNumHeads> head_ok{};
  std::vector<double> flat_p, flat_t;
  std::array<std::vector<double>, nn::kNumHeads> per_p, per_t;
  std::vector<double> steer_p(n), steer_t(n);
  for (std::size_t i = 0; i < n; ++i) {
    bool every = true;
    for (int h = 0; h < nn::kNumHeads; ++h) {
      const bool p = pred[i][h] >= threshold;
      const bool t = targets[i][h] >= threshold;
      head_ok[h] += p == t;
      every = every && p == t;
      flat_p.push_back(pred[i][h]);
      flat_t.push_back(targets[i][h]);
      per_p[h].push_back(pred[i][h]);
      per_t[h].push_back(targets[i][h]);
    }
    all_ok += every;
    pj[i] = pred[i][nn::kJunction] >= threshold;
    tj[i] = targets[i][nn::kJunction] >= threshold;
    agree += nav::threshold_actions(pred[i], threshold).action ==
             nav::threshold_actions(targets[i], threshold).action;
    steer_p[i] = pred[i][nn::kYawLeft] - pred[i][nn::kYawRight];
    steer_t[i] = targets[i][nn::kYawLeft] - targets[i][nn::kYawRight];
  }
  const double dn = static_cast<double>(n);
  rep.junction = confusion(pj, tj);
  rep.accuracy = accuracy(rep.junction);
  try {
    rep.f_measure = f_measure(rep.junction);
  } catch (const UndefinedMetric&) {
  }
  rep.accuracy_all_heads = static_cast<double>(all_ok) / dn;
  rep.action_agreement = static_cast<double>(agree) / dn;
  for (int h = 0; h < nn::kNumHeads; ++h) rep.head_accuracy[h] = static_cast<double>(head_ok[h]) / dn;
  rep.rmse = rmse(flat_t, flat_p);
  if (n >= 2) {
    try {
      rep.eva_residual = eva(steer_t, steer_p, EvaForm::kResidual);
      rep.eva_standard = eva(steer_t, steer_p, EvaForm::kStandard);
    } catch (const UndefinedMetric&) {
    }
    for (int h = 0; h < nn::kNumHeads; ++h) {
      try {
        rep.pearson_r[h] = pearson_r(per_p[h], per_t[h]);
      } catch (const UndefinedMetric&) {
      }
    }
    try {
      rep.pearson_steering = pearson_r(steer_p, steer_t);
    } catch (const UndefinedMetric&) {
    }
  }
  return rep;
}

std::string format_table(const std::vector<TableRow>& rows) {
  auto opt = [](const std::optional<double>& v) {
    char buf[32];
    if (!v) return std::string("n/a");
    std::snprintf(buf, sizeof buf, "%.4f", *v);
    return std::string(buf);
  };
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %10s %10s %10s %17s %10s %7s %12s\n", "Model", "F-Measure",
                "Accuracy", "RMSE", "EVA(res/std)", "FPS", "Layers", "Parameters");
  out += line;
  for (const TableRow& r : rows) {
    const MetricsReport& m = r.report;
    const std::string eva_cell = opt(m.eva_residual) + "/" + opt(m.eva_standard);
    const std::string fps = m.latency ? opt(m.latency->fps) : std::string("n/a");
    char params[32];
    std::snprintf(params, sizeof params, "%.2e", static_cast<double>(m.parameters));
    // A timing-only report has no evaluated frames.
    const std::optional<double> acc = m.frames > 0 ? std::optional<double>(m.accuracy) : std::nullopt;
    const std::optional<double> err = m.frames > 0 ? std::optional<double>(m.rmse) : std::nullopt;
    std::snprintf(line, sizeof line, "%-12s %10s %10s %10s %17s %10s %7d %12s\n", r.name.c_str(),
                  opt(m.f_measure).c_str(), opt(acc).c_str(), opt(err).c_str(), eva_cell.c_str(), fps.c_str(),
                  m.layers, params);
    out += line;
  }
  return out;
}

}  // namespace roadnav::metrics
