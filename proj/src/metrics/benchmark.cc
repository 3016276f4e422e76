#include "roadnav/metrics/benchmark.h"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "roadnav/common/error.h"

namespace roadnav::metrics {

double percentile(std::vector<double> samples, double q) {
  if (samples.empty()) throw InvalidInput("percentile: no samples");
  if (q < 0 || q > 100) throw InvalidInput("percentile: q outside [0, 100]");
  std::sort(samples.begin(), samples.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q / 100.0 * samples.size()));
  return samples[std::max<std::size_t>(rank, 1) - 1];
}

LatencyStats fps_benchmark(const FramePipeline& pipeline, const std::vector<tomo::Image>& frames,
                           int warmup) {
  if (frames.empty()) throw InvalidInput("bench: empty frame list");
  if (warmup < 0) throw InvalidInput("bench: negative warmup");
  for (int i = 0; i < warmup; ++i) pipeline(frames[i % frames.size()]);

  const std::size_t runs = std::max<std::size_t>(frames.size(), kMinMeasured);
  std::vector<double> ms;
  ms.reserve(runs);
  for (std::size_t i = 0; i < runs; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    pipeline(frames[i % frames.size()]);
    ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  LatencyStats s;
  s.measured = static_cast<int>(runs);
  for (double v : ms) s.mean_ms += v;
  s.mean_ms /= static_cast<double>(runs);
  s.p50_ms = percentile(ms, 50);
  s.p95_ms = percentile(ms, 95);
  // An identity stub can finish below the clock resolution.
  s.fps = 1000.0 / std::max(s.mean_ms, 1e-6);
  return s;
}

}  // namespace roadnav::metrics
