#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "roadnav/common/json_util.h"
#include "roadnav/nn/network.h"

namespace roadnav::nav {

using nn::ActionVector;

enum class Action { kForward, kYawLeft, kYawRight, kHalt };
std::string_view to_string(Action a);

struct DiscreteCommand {
  Action action = Action::kForward;
  bool junction_detected = false;
  friend bool operator==(const DiscreteCommand&, const DiscreteCommand&) = default;
};

// Positive yaw_rate turns right (clockwise seen from above).
struct VelocityCommand {
  double forward_speed = 0.0;
  double yaw_rate = 0.0;
  bool hover = false;
  friend bool operator==(const VelocityCommand&, const VelocityCommand&) = default;
};

struct NavConfig {
  double threshold = 0.5;
  int rise_frames = 3;    // M
  int rearm_frames = 5;   // N
  int override_frames = 15;     // K
  int turn_delay_frames = 0;    // frames between registration and the start of the override
  double v_forward = 2.0;
  double v_turn = 1.0;
  double yaw_rate = 1.57;
  double max_speed = 6.0;

  void validate() const;
  Json to_json() const;
  static NavConfig from_json(const Json& j);
  // Keys absent from j keep their value from base.
  static NavConfig from_json(const Json& j, const NavConfig& base);
};

// Halt wins when it clears the threshold and is the largest command head;
// otherwise the larger yaw head that clears it (exact tie: left); otherwise
// Forward, also when no head clears the threshold.
DiscreteCommand threshold_actions(const ActionVector& av, double threshold = 0.5);

VelocityCommand to_velocity(Action action, const NavConfig& cfg);

// Rising-edge counter with hysteresis: while armed, M consecutive positive
// flags register one junction and disarm; while disarmed, N consecutive
// negative flags re-arm.
struct JunctionCounter {
  int count = 0;
  bool armed = true;
  int consecutive_pos = 0;
  int consecutive_neg = 0;
  int rise = 3;
  int rearm = 5;

  JunctionCounter() = default;
  JunctionCounter(int m, int n);

  // Returns true exactly on the call that increments count.
  bool update(bool flag);
};

enum class Turn { kLeft, kRight, kStraight };
std::string_view to_string(Turn t);

struct Directive {
  int junction = 1;  // 1-based registration index
  Turn turn = Turn::kStraight;
  friend bool operator==(const Directive&, const Directive&) = default;
};

struct RoutePlan {
  std::vector<Directive> directives;
  // Registration index after which the vehicle hovers; 0 leaves the terminal
  // halt to the caller (Controller::finish).
  int terminal_junction = 0;

  void validate() const;  // InvalidRoute
  Json to_json() const;
  static RoutePlan from_json(const Json& j);
  friend bool operator==(const RoutePlan&, const RoutePlan&) = default;
};

struct NavRecord {
  int frame = 0;
  ActionVector av{};
  DiscreteCommand command;
  VelocityCommand velocity;
  int count = 0;
  bool registered = false;
  std::optional<Turn> override_turn;  // set while an override drives the vehicle
  bool terminal = false;

  Json to_json() const;
};

// Stateful per-frame fold: threshold, count junctions, apply route overrides.
// While an override is active the model's command is ignored; the counter
// keeps consuming junction flags.
class Controller {
 public:
  Controller(RoutePlan route, NavConfig cfg);

  NavRecord step(const ActionVector& av);
  // Latches the terminal halt; subsequent steps hover.
  void finish() { halted_ = true; }

  int count() const { return counter_.count; }
  bool override_active() const;
  bool halted() const { return halted_; }
  // Directives consumed so far, with the frame at which each override begins.
  struct Scheduled {
    Directive directive;
    int registered_frame;
    int start_frame;
  };
  const std::vector<Scheduled>& schedule() const { return scheduled_; }

 private:
  RoutePlan route_;
  NavConfig cfg_;
  JunctionCounter counter_;
  std::size_t next_directive_ = 0;
  std::vector<Scheduled> scheduled_;
  int frame_ = 0;
  int busy_until_ = 0;  // first frame after the last scheduled override
  bool halted_ = false;
};

// Stateless single-frame form: an override for the directive matching
// counter.count if it is unconsumed, else the thresholded command's velocity.
VelocityCommand plan_step(const RoutePlan& route, const JunctionCounter& counter,
                          const DiscreteCommand& cmd, const NavConfig& cfg,
                          const std::vector<bool>& consumed);

struct ControllerRun {
  std::vector<VelocityCommand> commands;
  std::vector<NavRecord> trace;
};
ControllerRun run_controller(const std::vector<ActionVector>& stream, const RoutePlan& route,
                             const NavConfig& cfg);

std::string trace_to_jsonl(const std::vector<NavRecord>& trace);

}  // namespace roadnav::nav
