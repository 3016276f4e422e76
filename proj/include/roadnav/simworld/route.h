#pragma once

#include <cstdint>
#include <vector>

#include "roadnav/common/json_util.h"
#include "roadnav/navigation/navigation.h"
#include "roadnav/simworld/pose.h"
#include "roadnav/simworld/road_map.h"

namespace roadnav::sim {

struct RouteJunction {
  int node = 0;     // index into RoadMap::junctions
  double s = 0.0;   // arc length of the node along the route path
  nav::Turn turn = nav::Turn::kStraight;
};

// A drive along the road graph: it starts start_s meters into a dead-end
// edge, crosses every junction in order and ends at goal_s on the exit edge.
// The path keeps the whole exit edge so lookahead never runs off its end.
struct Route {
  Polyline path;
  std::vector<RouteJunction> junctions;
  double start_s = 0.0;
  double goal_s = 0.0;

  DronePose start_pose() const;
  double length() const { return goal_s - start_s; }
  // One directive per junction, straight ones included.
  nav::RoutePlan plan() const;

  Json to_json() const;
  static Route from_json(const Json& j);
};

struct RouteParams {
  int junctions = 3;
  double min_length = 0.0;
  double start_offset = 5.0;  // from the dead end
  double tail = 20.0;         // past the last junction
  int max_attempts = 2000;

  Json to_json() const;
  static RouteParams from_json(const Json& j);
};

// |angle| below 45 degrees is straight; otherwise the sign picks the side.
nav::Turn classify_turn(Vec2 incoming, Vec2 outgoing);

// Seeded random walk without revisits. InvalidRoute when no walk satisfies
// the parameters within max_attempts.
Route plan_route(const RoadMap& map, std::uint64_t seed, const RouteParams& params);

}  // namespace roadnav::sim
