#pragma once

#include <functional>
#include <vector>

#include "roadnav/metrics/metrics.h"
#include "roadnav/tomography/image.h"

namespace roadnav::metrics {

using FramePipeline = std::function<void(const tomo::Image&)>;

inline constexpr int kMinMeasured = 30;

// Runs `warmup` untimed calls, then times one call per frame, cycling the list
// until at least 30 calls are measured. Wall clock, single thread of control.
// InvalidInput on an empty frame list or negative warmup.
LatencyStats fps_benchmark(const FramePipeline& pipeline, const std::vector<tomo::Image>& frames,
                           int warmup = 10);

// Nearest-rank percentile of unsorted samples, q in [0, 100].
double percentile(std::vector<double> samples, double q);

}  // namespace roadnav::metrics
