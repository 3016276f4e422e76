#include <algorithm>
#include <cmath>

#include "roadnav/common/error.h"
#include "roadnav/navigation/navigation.h"

namespace roadnav::nav {

std::string_view to_string(Action a) {
  switch (a) {
    case Action::kForward:
      return "forward";
    case Action::kYawLeft:
      return "yaw_left";
    case Action::kYawRight:
      return "yaw_right";
    case Action::kHalt:
      return "halt";
  }
  return "unknown";
}

void NavConfig::validate() const {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw InvalidInput("nav: threshold must be in (0, 1]");
  if (rise_frames < 1 || rearm_frames < 1) throw InvalidInput("nav: M and N must be >= 1");
  if (override_frames < 0 || turn_delay_frames < 0) throw InvalidInput("nav: negative frame count");
  if (!(max_speed > 0.0 && max_speed <= 6.0)) throw InvalidInput("nav: max_speed must be in (0, 6]");
  if (v_forward < 0 || v_forward > max_speed || v_turn < 0 || v_turn > max_speed) {
    throw InvalidInput("nav: speeds must lie in [0, max_speed]");
  }
  if (!(yaw_rate > 0.0)) throw InvalidInput("nav: yaw_rate must be > 0");
}

Json NavConfig::to_json() const {
  return Json{{"threshold", threshold},
              {"rise_frames", rise_frames},
              {"rearm_frames", rearm_frames},
              {"override_frames", override_frames},
              {"turn_delay_frames", turn_delay_frames},
              {"v_forward", v_forward},
              {"v_turn", v_turn},
              {"yaw_rate", yaw_rate},
              {"max_speed", max_speed}};
}

NavConfig NavConfig::from_json(const Json& j) { return from_json(j, NavConfig{}); }

NavConfig NavConfig::from_json(const Json& j, const NavConfig& base) {
  reject_unknown_keys(j, {"threshold", "rise_frames", "rearm_frames", "override_frames",
                          "turn_delay_frames", "v_forward", "v_turn", "yaw_rate", "max_speed"},
                      "nav");
  NavConfig c = base;
  c.threshold = j.value("threshold", c.threshold);
  c.rise_frames = j.value("rise_frames", c.rise_frames);
  c.rearm_frames = j.value("rearm_frames", c.rearm_frames);
  c.override_frames = j.value("override_frames", c.override_frames);
  c.turn_delay_frames = j.value("turn_delay_frames", c.turn_delay_frames);
  c.v_forward = j.value("v_forward", c.v_forward);
  c.v_turn = j.value("v_turn", c.v_turn);
  c.yaw_rate = j.value("yaw_rate", c.yaw_rate);
  c.max_speed = j.value("max_speed", c.max_speed);
  c.validate();
  return c;
}

DiscreteCommand threshold_actions(const ActionVector& av, double threshold) {
  for (double v : av) {
    if (std::isnan(v)) throw InvalidInput("threshold_actions: NaN component");
  }
  DiscreteCommand cmd;
  cmd.junction_detected = av[nn::kJunction] >= threshold;
  const double halt = av[nn::kHalt];
  const double left = av[nn::kYawLeft];
  const double right = av[nn::kYawRight];
  const double top = std::max({av[nn::kForward], left, right, halt});
  if (halt >= threshold && halt == top) {
    cmd.action = Action::kHalt;
  } else if (left >= threshold || right >= threshold) {
    cmd.action = left >= right ? Action::kYawLeft : Action::kYawRight;
  } else {
    cmd.action = Action::kForward;
  }
  return cmd;
}

VelocityCommand to_velocity(Action action, const NavConfig& cfg) {
  switch (action) {
    case Action::kForward:
      return {std::min(cfg.v_forward, cfg.max_speed), 0.0, false};
    case Action::kYawLeft:
      return {std::min(cfg.v_turn, cfg.max_speed), -cfg.yaw_rate, false};
    case Action::kYawRight:
      return {std::min(cfg.v_turn, cfg.max_speed), cfg.yaw_rate, false};
    case Action::kHalt:
      return {0.0, 0.0, true};
  }
  return {0.0, 0.0, true};
}

}  // namespace roadnav::nav
