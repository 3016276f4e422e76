#include "roadnav/simworld/geometry.h"

#include <algorithm>
#include <numbers>

#include "roadnav/common/error.h"

namespace roadnav::sim {

double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  a = std::fmod(a, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = ab.dot(ab);
  const double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + ab * t)).norm();
}

Polyline::Polyline(std::vector<Vec2> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw InvalidInput("polyline: need at least two points");
  cum_.resize(points_.size());
  cum_[0] = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i) {
    cum_[i] = cum_[i - 1] + (points_[i] - points_[i - 1]).norm();
  }
}

Vec2 Polyline::point_at(double s) const {
  s = std::clamp(s, 0.0, length());
  const auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
  std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - cum_.begin() - 1, 0));
  if (i + 1 >= points_.size()) i = points_.size() - 2;
  const double seg = cum_[i + 1] - cum_[i];
  const double t = seg > 0 ? (s - cum_[i]) / seg : 0.0;
  return points_[i] + (points_[i + 1] - points_[i]) * t;
}

Vec2 Polyline::tangent_at(double s) const {
  s = std::clamp(s, 0.0, length());
  const auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
  std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - cum_.begin() - 1, 0));
  if (i + 1 >= points_.size()) i = points_.size() - 2;
  const Vec2 d = points_[i + 1] - points_[i];
  const double n = d.norm();
  return n > 0 ? d * (1.0 / n) : Vec2{1.0, 0.0};
}

Projection Polyline::project(Vec2 p, double s_min, double s_max) const {
  s_min = std::max(s_min, 0.0);
  s_max = std::min(s_max, length());
  Projection best;
  best.distance = 1e300;
  for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
    const double lo = std::max(cum_[i], s_min);
    const double hi = std::min(cum_[i + 1], s_max);
    if (lo > hi) continue;
    const Vec2 a = point_at(lo);
    const Vec2 b = point_at(hi);
    const Vec2 ab = b - a;
    const double len2 = ab.dot(ab);
    const double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    const Vec2 q = a + ab * t;
    const double d = (p - q).norm();
    if (d < best.distance) {
      best.distance = d;
      best.s = lo + t * (hi - lo);
      best.point = q;
    }
  }
  return best;
}

}  // namespace roadnav::sim
