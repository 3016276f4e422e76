#include "roadnav/tomography/phantom.h"

#include <array>
#include <cmath>
#include <numbers>

#include "roadnav/common/error.h"

namespace roadnav::tomo {
namespace {

struct Ellipse {
  double amplitude, a, b, x0, y0, phi_deg;
};

constexpr std::array<Ellipse, 10> kSheppLogan = {{
    {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
    {-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
    {-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0},
    {-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0},
    {0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0},
    {0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0},
    {0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0},
    {0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0},
}};

template <typename F>
Image rasterize(int size, int supersample, F&& value_at) {
  if (size <= 0 || supersample <= 0) throw InvalidInput("phantom: bad size");
  Image img(size, size);
  const double center = 0.5 * (size - 1);
  const double inv = 1.0 / (supersample * supersample);
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      double acc = 0.0;
      for (int u = 0; u < supersample; ++u) {
        for (int v = 0; v < supersample; ++v) {
          const double x = c - center - 0.5 + (v + 0.5) / supersample;
          const double y = center - r + 0.5 - (u + 0.5) / supersample;
          acc += value_at(x, y);
        }
      }
      img.at(r, c) = acc * inv;
    }
  }
  return img;
}

}  // namespace

Image shepp_logan(int size, int supersample) {
  const double half = 0.5 * size;
  return rasterize(size, supersample, [half](double px, double py) {
    const double x = px / half;
    const double y = py / half;
    double v = 0.0;
    for (const Ellipse& e : kSheppLogan) {
      const double phi = e.phi_deg * std::numbers::pi / 180.0;
      const double dx = x - e.x0;
      const double dy = y - e.y0;
      const double xr = dx * std::cos(phi) + dy * std::sin(phi);
      const double yr = -dx * std::sin(phi) + dy * std::cos(phi);
      if ((xr * xr) / (e.a * e.a) + (yr * yr) / (e.b * e.b) <= 1.0) v += e.amplitude;
    }
    return v;
  });
}

Image disc(int size, double radius, int supersample) {
  const double r2 = radius * radius;
  return rasterize(size, supersample,
                   [r2](double x, double y) { return x * x + y * y <= r2 ? 1.0 : 0.0; });
}

}  // namespace roadnav::tomo
