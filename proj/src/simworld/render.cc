#include "roadnav/simworld/render.h"

#include <algorithm>
#include <cstdint>
#include <numbers>

#include "roadnav/common/error.h"

namespace roadnav::sim {
namespace {

constexpr double kNoiseCell = 0.05;     // meters per speckle cell
constexpr double kShadowPeriod = 12.0;  // meters between band centers
constexpr double kShadowDuty = 0.35;    // shaded fraction of each period

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit_from(std::uint64_t h) { return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53; }

double speckle(std::uint64_t seed, Vec2 p, double sigma) {
  const auto ix = static_cast<std::int64_t>(std::floor(p.x / kNoiseCell));
  const auto iy = static_cast<std::int64_t>(std::floor(p.y / kNoiseCell));
  const std::uint64_t h = splitmix(seed ^ splitmix(static_cast<std::uint64_t>(ix) * 0x100000001b3ULL ^
                                                   splitmix(static_cast<std::uint64_t>(iy))));
  const double u1 = unit_from(h);
  const double u2 = unit_from(splitmix(h));
  const double g = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  return sigma * std::clamp(g, -3.0, 3.0);
}

// 0 outside a band, 1 fully inside; bands run across a seeded direction.
double shadow_weight(std::uint64_t seed, Vec2 p, ShadowMode mode) {
  const double angle = unit_from(splitmix(seed ^ 0x5ad0ULL)) * std::numbers::pi;
  const double phase = unit_from(splitmix(seed ^ 0x5ad1ULL)) * kShadowPeriod;
  const double u = p.x * std::cos(angle) + p.y * std::sin(angle) + phase;
  const double f = u / kShadowPeriod - std::floor(u / kShadowPeriod);  // [0, 1)
  if (mode == ShadowMode::kSharp) return f < kShadowDuty ? 1.0 : 0.0;
  // Raised cosine centered on the band, same mean darkness as sharp bands.
  const double d = std::abs(f - 0.5 * kShadowDuty);
  const double w = std::min(d, 1.0 - d);
  return w < kShadowDuty ? 0.5 * (1.0 + std::cos(std::numbers::pi * w / kShadowDuty)) : 0.0;
}

struct Piece {
  Vec2 a, b;
};

}  // namespace

std::string_view to_string(ShadowMode m) {
  switch (m) {
    case ShadowMode::kOff: return "off";
    case ShadowMode::kSoft: return "soft";
    case ShadowMode::kSharp: return "sharp";
  }
  return "off";
}

ShadowMode shadow_mode_from_string(std::string_view s) {
  if (s == "off") return ShadowMode::kOff;
  if (s == "soft") return ShadowMode::kSoft;
  if (s == "sharp") return ShadowMode::kSharp;
  throw InvalidInput("camera: unknown shadow mode '" + std::string(s) + "'");
}

void CameraModel::validate() const {
  if (resolution < 16) throw InvalidInput("camera: resolution must be >= 16");
  if (!(footprint > 0) || !(noise_sigma >= 0) || !std::isfinite(forward_offset)) {
    throw InvalidInput("camera: bad footprint, noise or offset");
  }
}

Json CameraModel::to_json() const {
  return Json{{"footprint", footprint},
              {"resolution", resolution},
              {"noise_sigma", noise_sigma},
              {"shadow_mode", std::string(to_string(shadow_mode))},
              {"forward_offset", forward_offset}};
}

CameraModel CameraModel::from_json(const Json& j) {
  reject_unknown_keys(j, {"footprint", "resolution", "noise_sigma", "shadow_mode", "forward_offset"}, "camera");
  CameraModel c;
  c.footprint = j.value("footprint", c.footprint);
  c.resolution = j.value("resolution", c.resolution);
  c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
  c.shadow_mode = shadow_mode_from_string(j.value("shadow_mode", std::string("off")));
  c.forward_offset = j.value("forward_offset", c.forward_offset);
  c.validate();
  return c;
}

Vec2 pixel_to_world(const DronePose& pose, const CameraModel& cam, double row, double col) {
  const double half = 0.5 * (cam.resolution - 1);
  const double mpp = cam.meters_per_pixel();
  const double lateral = (col - half) * mpp;
  const double forward = (half - row) * mpp + cam.forward_offset;
  return pose.position() + heading_vector(pose.heading) * forward + right_vector(pose.heading) * lateral;
}

tomo::Image render_view(const RoadMap& map, const DronePose& pose, const CameraModel& cam) {
  cam.validate();
  if (!std::isfinite(pose.x) || !std::isfinite(pose.y) || !map.in_world(pose.position())) {
    throw OutOfWorld("render: pose outside the world extent");
  }
  const int n = cam.resolution;
  const double hw = map.road_half_width;

  // Centerline pieces that can reach the footprint.
  const Vec2 center = pixel_to_world(pose, cam, 0.5 * (n - 1), 0.5 * (n - 1));
  const double reach = 0.5 * std::sqrt(2.0) * cam.footprint + hw + cam.meters_per_pixel();
  std::vector<Piece> pieces;
  for (const Polyline& seg : map.segments) {
    const auto& pts = seg.points();
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      if (point_segment_distance(center, pts[i], pts[i + 1]) <= reach) pieces.push_back({pts[i], pts[i + 1]});
    }
  }
  auto covered = [&](Vec2 p) {
    for (const Piece& pc : pieces) {
      if (point_segment_distance(p, pc.a, pc.b) <= hw) return true;
    }
    return false;
  };

  tomo::Image img(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      int hits = 0;
      for (double dr : {-0.25, 0.25}) {
        for (double dc : {-0.25, 0.25}) hits += covered(pixel_to_world(pose, cam, r + dr, c + dc));
      }
      const double cov = 0.25 * hits;
      const Vec2 p = pixel_to_world(pose, cam, r, c);
      const double bg = kBackgroundIntensity + (cam.noise_sigma > 0 ? speckle(map.texture_seed, p, cam.noise_sigma) : 0.0);
      double v = kRoadIntensity * cov + bg * (1.0 - cov);
      if (cam.shadow_mode != ShadowMode::kOff) {
        v *= 1.0 - (1.0 - kShadowFactor) * shadow_weight(map.texture_seed, p, cam.shadow_mode);
      }
      img.at(r, c) = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

}  // namespace roadnav::sim
