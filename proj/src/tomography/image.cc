#include "roadnav/tomography/image.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "roadnav/common/error.h"

namespace roadnav::tomo {

Image::Image(int w, int h, double fill)
    : width(w), height(h), data(static_cast<std::size_t>(std::max(w, 0)) * std::max(h, 0), fill) {}

Image normalize_minmax(const Image& img) {
  Image out = img;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double& v : out.data) {
    if (!std::isfinite(v)) v = 0.0;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double range = hi - lo;
  if (!(range > 0.0)) {
    std::fill(out.data.begin(), out.data.end(), 0.0);
    return out;
  }
  for (double& v : out.data) v = (v - lo) / range;
  return out;
}

namespace {

// One output sample is a weighted sum of input samples along one axis.
struct Tap {
  int index;
  double weight;
};

std::vector<std::vector<Tap>> resample_taps(int in, int out) {
  std::vector<std::vector<Tap>> taps(out);
  if (out == in) {
    for (int i = 0; i < out; ++i) taps[i] = {{i, 1.0}};
  } else if (out < in) {
    // Box filter: each output pixel averages the input interval it covers.
    const double scale = static_cast<double>(in) / out;
    for (int i = 0; i < out; ++i) {
      const double a = i * scale;
      const double b = (i + 1) * scale;
      for (int k = static_cast<int>(std::floor(a)); k < std::min(in, static_cast<int>(std::ceil(b))); ++k) {
        const double overlap = std::min(b, k + 1.0) - std::max(a, static_cast<double>(k));
        if (overlap > 0.0) taps[i].push_back({k, overlap / scale});
      }
    }
  } else {
    const double scale = static_cast<double>(in) / out;
    for (int i = 0; i < out; ++i) {
      double src = (i + 0.5) * scale - 0.5;
      src = std::clamp(src, 0.0, static_cast<double>(in - 1));
      const int k0 = static_cast<int>(std::floor(src));
      const int k1 = std::min(k0 + 1, in - 1);
      const double t = src - k0;
      if (k1 == k0) {
        taps[i] = {{k0, 1.0}};
      } else {
        taps[i] = {{k0, 1.0 - t}, {k1, t}};
      }
    }
  }
  return taps;
}

}  // namespace

Image resize(const Image& img, int out_width, int out_height) {
  if (img.empty() || out_width <= 0 || out_height <= 0) {
    throw InvalidInput("resize: zero-dimension image");
  }
  if (out_width == img.width && out_height == img.height) return img;
  const auto col_taps = resample_taps(img.width, out_width);
  const auto row_taps = resample_taps(img.height, out_height);

  Image horiz(out_width, img.height);
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < out_width; ++c) {
      double acc = 0.0;
      for (const Tap& t : col_taps[c]) acc += t.weight * img.at(r, t.index);
      horiz.at(r, c) = acc;
    }
  }
  Image out(out_width, out_height);
  for (int r = 0; r < out_height; ++r) {
    for (int c = 0; c < out_width; ++c) {
      double acc = 0.0;
      for (const Tap& t : row_taps[r]) acc += t.weight * horiz.at(t.index, c);
      out.at(r, c) = acc;
    }
  }
  return out;
}

Image pad_to_square(const Image& img) {
  if (img.width == img.height) return img;
  const int side = std::max(img.width, img.height);
  Image out(side, side, 0.0);
  const int r0 = (side - img.height) / 2;
  const int c0 = (side - img.width) / 2;
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) out.at(r + r0, c + c0) = img.at(r, c);
  }
  return out;
}

Image grayscale(std::span<const double> interleaved, int width, int height, int channels) {
  if (width <= 0 || height <= 0 || channels <= 0) throw InvalidInput("grayscale: empty frame");
  if (interleaved.size() != static_cast<std::size_t>(width) * height * channels) {
    throw InvalidInput("grayscale: buffer size does not match dimensions");
  }
  Image out(width, height);
  for (std::size_t p = 0; p < out.size(); ++p) {
    double acc = 0.0;
    for (int ch = 0; ch < channels; ++ch) acc += interleaved[p * channels + ch];
    out.data[p] = acc / channels;
  }
  return out;
}

Image quantize8(const Image& img) {
  Image out = img;
  for (double& v : out.data) v = std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
  return out;
}

}  // namespace roadnav::tomo
