#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "roadnav/common/json_util.h"
#include "roadnav/tomography/image.h"

namespace roadnav::tomo {

// Radon-domain raster. Row i holds the projection at angles[i]; column j is
// offset s_j = (j - (offset_count - 1) / 2) * offset_spacing.
struct Sinogram {
  std::vector<double> angles;
  int offset_count = 0;
  double offset_spacing = 1.0;
  std::vector<double> data;

  Sinogram() = default;
  Sinogram(std::vector<double> angles, int offset_count, double offset_spacing = 1.0);

  int num_angles() const { return static_cast<int>(angles.size()); }
  double offset(int j) const { return (j - 0.5 * (offset_count - 1)) * offset_spacing; }
  double& at(int i, int j) { return data[static_cast<std::size_t>(i) * offset_count + j]; }
  double at(int i, int j) const { return data[static_cast<std::size_t>(i) * offset_count + j]; }

  friend bool operator==(const Sinogram&, const Sinogram&) = default;
};

// n angles uniformly spaced over [0, pi).
std::vector<double> uniform_angles(int n);

enum class Interpolation { kNearest, kLinear };
enum class Filter { kRamp, kNone };

struct TomoConfig {
  int num_angles = 90;
  int offset_count = 0;  // 0 selects ceil(image diagonal), rounded up to odd
  Interpolation interpolation = Interpolation::kLinear;
  Filter filter = Filter::kRamp;
  int output_size = 100;

  void validate() const;
  Json to_json() const;
  static TomoConfig from_json(const Json& j);
  Digest digest() const { return json_digest(to_json()); }
};

// Offset count used for a square image of the given side.
int resolve_offset_count(const TomoConfig& cfg, int side);

// Letterbox to square, min-max normalize, then resize to output_size^2.
Image preprocess_frame(const Image& raw, const TomoConfig& cfg);

// Discrete Radon transform along x(z) = z*(sin a, -cos a) + s*(cos a, sin a).
// Each sample is the integral of the interpolated image (box pixels for
// nearest, tent pixels for linear) over the strip |s' - s_j| < ds/2, so the
// per-angle sum equals the image sum. Outside the image reads as zero.
// Pixel (r, c) sits at x = c - (W-1)/2, y = (H-1)/2 - r.
Sinogram radon(const Image& img, const TomoConfig& cfg);

// Filters every projection by |omega| (cycles per unit offset) on a zero-padded
// DFT grid of at least twice the offset count, rounded to a power of two.
Sinogram ramp_filter(const Sinogram& sino);

// Pixel-driven adjoint: each pixel sums the linearly interpolated projection
// value at s = x . (cos a, sin a) over all angles, times pi / num_angles.
Image backproject(const Sinogram& sino, int out_size);

// backproject(ramp_filter(sino)) without normalization. The 1/2 of the
// full-circle inversion formula is absorbed by integrating angles over [0, pi).
Image fbp_raw(const Sinogram& sino, int out_size);

// fbp_raw, non-finite samples zeroed, then min-max normalized to [0,1].
Image fbp(const Sinogram& sino, int out_size);

// preprocess -> radon -> filter (per cfg.filter) -> backproject -> normalize.
Image featurize(const Image& raw, const TomoConfig& cfg);

}  // namespace roadnav::tomo
