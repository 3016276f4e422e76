#pragma once

#include <cstdint>
#include <vector>

#include "roadnav/common/json_util.h"
#include "roadnav/simworld/geometry.h"

namespace roadnav::sim {

// Perturbed grid: `rows` horizontal roads spanning the world and `cols`
// vertical roads crossing them. A vertical road may stop at the outermost
// horizontal road, which makes a T junction there.
struct MapParams {
  double extent = 400.0;  // square world side, meters
  int rows = 2;
  int cols = 2;
  double spacing = 60.0;
  double node_jitter = 4.0;  // uniform +- offset of every junction, meters
  double bend = 3.0;         // lateral offset of the vertex between consecutive stops
  double t_junction_prob = 0.5;
  double road_half_width = 3.0;
  double end_margin = 10.0;  // gap between road ends and the world border

  void validate() const;
  Json to_json() const;
  static MapParams from_json(const Json& j);
};

struct Junction {
  Vec2 position;
  int arms = 4;
};

// Road stretch between two consecutive stops (junctions or road ends) of one
// centerline. from/to are junction indices, -1 for a dead end.
struct RoadEdge {
  int road = 0;
  int from = -1;
  int to = -1;
  std::vector<Vec2> points;
  double length() const;
};

struct RoadMap {
  std::uint64_t seed = 0;
  std::uint64_t texture_seed = 0;
  double extent = 0.0;
  double road_half_width = 3.0;
  MapParams params;
  std::vector<Polyline> segments;
  std::vector<Junction> junctions;

  bool in_world(Vec2 p) const { return p.x >= 0 && p.y >= 0 && p.x <= extent && p.y <= extent; }
  double distance_to_road(Vec2 p) const;
  double nearest_junction_distance(Vec2 p) const;  // +inf when there are none
  bool on_road(Vec2 p) const { return distance_to_road(p) <= road_half_width; }

  // Splits every centerline at the junctions lying on its vertices.
  std::vector<RoadEdge> edges() const;

  Json to_json() const;
  static RoadMap from_json(const Json& j);
};

// Deterministic in (seed, params). InvalidInput when the grid does not fit.
RoadMap generate_map(std::uint64_t seed, const MapParams& params);

}  // namespace roadnav::sim
