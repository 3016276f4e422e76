#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace roadnav::tomo {

// Dense grayscale raster, row-major, row 0 at the top.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  Image() = default;
  Image(int w, int h, double fill = 0.0);

  double& at(int row, int col) { return data[static_cast<std::size_t>(row) * width + col]; }
  double at(int row, int col) const {
    return data[static_cast<std::size_t>(row) * width + col];
  }
  std::size_t size() const { return data.size(); }
  bool empty() const { return width <= 0 || height <= 0; }

  friend bool operator==(const Image&, const Image&) = default;
};

// Min-max rescale to [0,1]. A constant (or empty-range) image maps to zeros.
// Non-finite samples are replaced by 0 before rescaling.
Image normalize_minmax(const Image& img);

// Area-averaging downsample / bilinear upsample, independently per axis.
Image resize(const Image& img, int out_width, int out_height);

// Centers the image on a zero square canvas of side max(width, height).
Image pad_to_square(const Image& img);

// Channel mean of an interleaved multi-channel frame.
Image grayscale(std::span<const double> interleaved, int width, int height, int channels);

// Rounds every sample to the nearest k/255, matching an 8-bit camera.
Image quantize8(const Image& img);

}  // namespace roadnav::tomo
