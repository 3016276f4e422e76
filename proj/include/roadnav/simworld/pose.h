#pragma once

#include "roadnav/common/json_util.h"
#include "roadnav/navigation/navigation.h"
#include "roadnav/simworld/geometry.h"

namespace roadnav::sim {

inline constexpr double kFrameDt = 1.0 / 30.0;
inline constexpr double kAltitude = 2.5;

struct DronePose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // radians, see geometry.h for the sign
  double altitude = kAltitude;

  Vec2 position() const { return {x, y}; }
  Json to_json() const;
  static DronePose from_json(const Json& j);
  friend bool operator==(const DronePose&, const DronePose&) = default;
};

// Unicycle update: heading first, then translation along the new heading.
// Hover returns the pose unchanged. Forward speed is clamped to [0, 6] m/s.
DronePose step_dynamics(const DronePose& pose, const nav::VelocityCommand& cmd,
                        double dt = kFrameDt);

}  // namespace roadnav::sim
