#pragma once

#include <cmath>
#include <vector>

namespace roadnav::sim {

// World frame: x east, y south (screen-like), meters. Headings are measured
// from +x toward +y, so a positive heading change turns right (clockwise seen
// from above).
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double k) const { return {x * k, y * k}; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  // Positive when o lies clockwise (to the right) of *this.
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline Vec2 heading_vector(double psi) { return {std::cos(psi), std::sin(psi)}; }
// Unit vector to the right of heading psi.
inline Vec2 right_vector(double psi) { return {-std::sin(psi), std::cos(psi)}; }

// Wraps to (-pi, pi].
double wrap_angle(double a);

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);

struct Projection {
  double s = 0.0;         // arc length of the closest point
  double distance = 0.0;  // distance from the query to that point
  Vec2 point;
};

// Polyline with cumulative arc lengths.
class Polyline {
 public:
  Polyline() = default;
  explicit Polyline(std::vector<Vec2> points);

  const std::vector<Vec2>& points() const { return points_; }
  double length() const { return cum_.empty() ? 0.0 : cum_.back(); }
  double arc_at(std::size_t vertex) const { return cum_[vertex]; }

  // Clamped to [0, length].
  Vec2 point_at(double s) const;
  Vec2 tangent_at(double s) const;

  // Closest point restricted to arc lengths in [s_min, s_max].
  Projection project(Vec2 p, double s_min = 0.0, double s_max = 1e300) const;

 private:
  std::vector<Vec2> points_;
  std::vector<double> cum_;
};

}  // namespace roadnav::sim
