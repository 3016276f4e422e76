#include <algorithm>

#include "roadnav/common/error.h"
#include "roadnav/simworld/pose.h"

namespace roadnav::sim {

Json DronePose::to_json() const {
  return Json{{"x", x}, {"y", y}, {"heading", heading}, {"altitude", altitude}};
}

DronePose DronePose::from_json(const Json& j) {
  reject_unknown_keys(j, {"x", "y", "heading", "altitude"}, "pose");
  try {
    DronePose p;
    p.x = j.at("x").get<double>();
    p.y = j.at("y").get<double>();
    p.heading = j.at("heading").get<double>();
    p.altitude = j.value("altitude", kAltitude);
    if (p.altitude != kAltitude) throw InvalidInput("pose: altitude is fixed at 2.5 m");
    return p;
  } catch (const Json::exception& e) {
    throw InvalidInput(std::string("pose: ") + e.what());
  }
}

DronePose step_dynamics(const DronePose& pose, const nav::VelocityCommand& cmd, double dt) {
  if (cmd.hover) return pose;
  DronePose next = pose;
  next.heading = pose.heading + cmd.yaw_rate * dt;
  const double v = std::clamp(cmd.forward_speed, 0.0, 6.0);
  next.x = pose.x + v * dt * std::cos(next.heading);
  next.y = pose.y + v * dt * std::sin(next.heading);
  return next;
}

}  // namespace roadnav::sim
