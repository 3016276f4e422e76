#include <algorithm>

#include "roadnav/common/error.h"
#include "roadnav/navigation/navigation.h"

namespace roadnav::nav {
namespace {

VelocityCommand override_velocity(Turn turn, const NavConfig& cfg) {
  return to_velocity(turn == Turn::kLeft ? Action::kYawLeft : Action::kYawRight, cfg);
}

}  // namespace

Json NavRecord::to_json() const {
  Json j{{"frame", frame},
         {"av", av},
         {"action", to_string(command.action)},
         {"junction", command.junction_detected},
         {"count", count},
         {"registered", registered},
         {"forward_speed", velocity.forward_speed},
         {"yaw_rate", velocity.yaw_rate},
         {"hover", velocity.hover},
         {"override", override_turn ? Json(to_string(*override_turn)) : Json(nullptr)},
         {"terminal", terminal}};
  return j;
}

Controller::Controller(RoutePlan route, NavConfig cfg)
    : route_(std::move(route)), cfg_(cfg), counter_(cfg.rise_frames, cfg.rearm_frames) {
  route_.validate();
  cfg_.validate();
}

bool Controller::override_active() const {
  for (const Scheduled& s : scheduled_) {
    if (s.start_frame >= 0 && frame_ - 1 >= s.start_frame &&
        frame_ - 1 < s.start_frame + cfg_.override_frames) {
      return true;
    }
  }
  return false;
}

NavRecord Controller::step(const ActionVector& av) {
  NavRecord rec;
  rec.frame = frame_;
  rec.av = av;
  rec.command = threshold_actions(av, cfg_.threshold);
  rec.registered = counter_.update(rec.command.junction_detected);
  rec.count = counter_.count;

  if (rec.registered) {
    if (next_directive_ < route_.directives.size() &&
        route_.directives[next_directive_].junction == counter_.count) {
      const Directive d = route_.directives[next_directive_++];
      int start = -1;
      if (d.turn != Turn::kStraight) {
        start = std::max(frame_ + cfg_.turn_delay_frames, busy_until_);
        busy_until_ = start + cfg_.override_frames;
      }
      scheduled_.push_back({d, frame_, start});
    }
    if (route_.terminal_junction > 0 && counter_.count == route_.terminal_junction) halted_ = true;
  }

  for (const Scheduled& s : scheduled_) {
    if (s.start_frame >= 0 && frame_ >= s.start_frame &&
        frame_ < s.start_frame + cfg_.override_frames) {
      rec.override_turn = s.directive.turn;
    }
  }

  if (halted_) {
    rec.velocity = to_velocity(Action::kHalt, cfg_);
    rec.terminal = true;
  } else if (rec.override_turn) {
    rec.velocity = override_velocity(*rec.override_turn, cfg_);
  } else {
    rec.velocity = to_velocity(rec.command.action, cfg_);
  }
  ++frame_;
  return rec;
}

VelocityCommand plan_step(const RoutePlan& route, const JunctionCounter& counter,
                          const DiscreteCommand& cmd, const NavConfig& cfg,
                          const std::vector<bool>& consumed) {
  route.validate();
  if (consumed.size() != route.directives.size()) {
    throw InvalidInput("plan_step: consumed flags must match the directive count");
  }
  for (std::size_t i = 0; i < route.directives.size(); ++i) {
    const Directive& d = route.directives[i];
    if (d.junction == counter.count && !consumed[i] && d.turn != Turn::kStraight) {
      return override_velocity(d.turn, cfg);
    }
  }
  return to_velocity(cmd.action, cfg);
}

ControllerRun run_controller(const std::vector<ActionVector>& stream, const RoutePlan& route,
                             const NavConfig& cfg) {
  Controller ctl(route, cfg);
  ControllerRun run;
  for (const ActionVector& av : stream) {
    NavRecord rec = ctl.step(av);
    run.commands.push_back(rec.velocity);
    run.trace.push_back(std::move(rec));
  }
  return run;
}

std::string trace_to_jsonl(const std::vector<NavRecord>& trace) {
  std::string out;
  for (const NavRecord& r : trace) out += r.to_json().dump() + "\n";
  return out;
}

}  // namespace roadnav::nav
