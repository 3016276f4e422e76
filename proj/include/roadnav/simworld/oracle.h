#pragma once

#include "roadnav/common/json_util.h"
#include "roadnav/nn/network.h"
#include "roadnav/simworld/pose.h"
#include "roadnav/simworld/road_map.h"
#include "roadnav/simworld/route.h"

namespace roadnav::sim {

struct OracleParams {
  double lookahead = 4.0;        // meters along the route
  double theta_tau = 0.15;       // radians
  double junction_radius = 4.0;  // r_j, inclusive
  double turn_snap = 1.0;        // lookahead stops at a turning node until this close

  void validate() const;
  Json to_json() const;
  static OracleParams from_json(const Json& j);
};

// Progress along the route path; projection is searched in a window around
// it so self-crossing or neighboring stretches cannot capture the drone.
struct OracleState {
  double s = 0.0;
};

inline constexpr double kProgressBack = 2.0;
inline constexpr double kProgressAhead = 10.0;

// Advances state.s to the windowed projection of the pose on route.path.
Projection track_progress(const Route& route, const DronePose& pose, OracleState& state);

// Signed heading error to the lookahead point, positive when it lies to the
// left.
double heading_error(const DronePose& pose, Vec2 target);

// Binary targets [forward, yaw_left, yaw_right, halt, junction]. Call once per
// frame in order; state carries the route progress.
nn::ActionVector oracle_policy(const RoadMap& map, const DronePose& pose, const Route& route,
                               OracleState& state, const OracleParams& params = {});

}  // namespace roadnav::sim
