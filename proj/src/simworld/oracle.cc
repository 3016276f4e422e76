#include "roadnav/simworld/oracle.h"

#include <cmath>

#include "roadnav/common/error.h"

namespace roadnav::sim {

void OracleParams::validate() const {
  if (!(lookahead > 0) || !(theta_tau >= 0) || !(junction_radius >= 0) || !(turn_snap >= 0)) {
    throw InvalidInput("oracle: parameters out of range");
  }
}

Json OracleParams::to_json() const {
  return Json{{"lookahead", lookahead},
              {"theta_tau", theta_tau},
              {"junction_radius", junction_radius},
              {"turn_snap", turn_snap}};
}

OracleParams OracleParams::from_json(const Json& j) {
  reject_unknown_keys(j, {"lookahead", "theta_tau", "junction_radius", "turn_snap"}, "oracle");
  OracleParams p;
  p.lookahead = j.value("lookahead", p.lookahead);
  p.theta_tau = j.value("theta_tau", p.theta_tau);
  p.junction_radius = j.value("junction_radius", p.junction_radius);
  p.turn_snap = j.value("turn_snap", p.turn_snap);
  p.validate();
  return p;
}

Projection track_progress(const Route& route, const DronePose& pose, OracleState& state) {
  const Projection pr =
      route.path.project(pose.position(), state.s - kProgressBack, state.s + kProgressAhead);
  state.s = pr.s;
  return pr;
}

double heading_error(const DronePose& pose, Vec2 target) {
  const Vec2 d = target - pose.position();
  if (d.norm() == 0.0) return 0.0;
  const Vec2 f = heading_vector(pose.heading);
  return -std::atan2(f.cross(d), f.dot(d));
}

nn::ActionVector oracle_policy(const RoadMap& map, const DronePose& pose, const Route& route,
                               OracleState& state, const OracleParams& params) {
  if (!map.in_world(pose.position())) throw OutOfWorld("oracle: pose outside the world extent");
  const Projection pr = track_progress(route, pose, state);

  double target_s = pr.s + params.lookahead;
  for (const RouteJunction& j : route.junctions) {
    if (j.turn != nav::Turn::kStraight && j.s > pr.s + params.turn_snap) {
      target_s = std::min(target_s, j.s);
      break;
    }
  }
  const double err = heading_error(pose, route.path.point_at(target_s));

  nn::ActionVector av{};
  av[nn::kForward] = pr.distance < map.road_half_width ? 1.0 : 0.0;
  av[nn::kYawLeft] = err > params.theta_tau ? 1.0 : 0.0;
  av[nn::kYawRight] = err < -params.theta_tau ? 1.0 : 0.0;
  av[nn::kHalt] = map.distance_to_road(pose.position()) > map.road_half_width ? 1.0 : 0.0;
  av[nn::kJunction] = map.nearest_junction_distance(pose.position()) <= params.junction_radius ? 1.0 : 0.0;
  return av;
}

}  // namespace roadnav::sim
