#include <cmath>
#include <limits>

#include "doctest.h"
#include "generators.h"
#include "oracles.h"
#include "roadnav/common/error.h"
#include "roadnav/navigation/navigation.h"

using namespace roadnav;
using namespace roadnav::nav;
using roadnav::testing::Rng;

namespace {

ActionVector av(double fwd, double left, double right, double halt, double junction) {
  return {fwd, left, right, halt, junction};
}

// Decision table written as an ordered rule list, independent of the
// implementation's branch structure.
Action table_action(const ActionVector& v, double tau) {
  const double f = v[0], l = v[1], r = v[2], h = v[3];
  const bool halt_is_max = h >= f && h >= l && h >= r;
  if (h >= tau && halt_is_max) return Action::kHalt;
  if (l >= tau && l >= r) return Action::kYawLeft;
  if (r >= tau && r > l) return Action::kYawRight;
  return Action::kForward;
}

std::vector<bool> flags_of(const std::string& pattern) {
  std::vector<bool> f;
  for (char c : pattern) f.push_back(c == 'T');
  return f;
}

std::vector<ActionVector> stream_from_flags(const std::vector<bool>& flags) {
  std::vector<ActionVector> s;
  for (bool b : flags) s.push_back(av(0.9, 0.1, 0.1, 0.1, b ? 0.9 : 0.1));
  return s;
}

}  // namespace

TEST_CASE("threshold_actions examples") {
  CHECK(threshold_actions(av(0.9, 0.1, 0.1, 0.1, 0.1)) == DiscreteCommand{Action::kForward, false});
  CHECK(threshold_actions(av(0.9, 0.1, 0.8, 0.1, 0.1)) == DiscreteCommand{Action::kYawRight, false});
  CHECK(threshold_actions(av(0.2, 0.2, 0.2, 0.2, 0.9)) == DiscreteCommand{Action::kForward, true});
  CHECK(threshold_actions(av(0.1, 0.7, 0.7, 0.1, 0.1)).action == Action::kYawLeft);
  CHECK(threshold_actions(av(0.1, 0.6, 0.8, 0.1, 0.1)).action == Action::kYawRight);
  CHECK(threshold_actions(av(0.1, 0.6, 0.1, 0.9, 0.1)).action == Action::kHalt);
  // Halt above tau but not the largest head loses to the yaw.
  CHECK(threshold_actions(av(0.1, 0.9, 0.1, 0.6, 0.1)).action == Action::kYawLeft);
  CHECK(threshold_actions(av(0.1, 0.1, 0.1, 0.1, 0.5)).junction_detected);
}

TEST_CASE("threshold_actions rejects NaN") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(threshold_actions(av(0.5, nan, 0.1, 0.1, 0.1)), InvalidInput);
}

TEST_CASE("threshold_actions matches the decision table on the 0.1 grid") {
  std::size_t points = 0, mismatches = 0;
  ActionVector v{};
  for (int a = 0; a <= 10; ++a)
    for (int b = 0; b <= 10; ++b)
      for (int c = 0; c <= 10; ++c)
        for (int d = 0; d <= 10; ++d)
          for (int e = 0; e <= 10; ++e) {
            v = {a / 10.0, b / 10.0, c / 10.0, d / 10.0, e / 10.0};
            const DiscreteCommand cmd = threshold_actions(v);
            const int code = static_cast<int>(cmd.action);
            if (code < 0 || code > 3 || cmd.action != table_action(v, 0.5) ||
                cmd.junction_detected != (v[4] >= 0.5)) {
              ++mismatches;
            }
            ++points;
          }
  CHECK(points == 161051);
  CHECK(mismatches == 0);
}

TEST_CASE("junction counter examples") {
  JunctionCounter jc;
  CHECK_FALSE(jc.update(true));
  CHECK_FALSE(jc.update(true));
  CHECK(jc.update(true));
  CHECK(jc.count == 1);
  CHECK_FALSE(jc.armed);

  JunctionCounter reset;
  int registrations = 0;
  for (bool f : flags_of("TTFTTT")) registrations += reset.update(f);
  CHECK(registrations == 1);
  CHECK(reset.count == 1);

  std::vector<bool> two(10, true);
  two.insert(two.end(), 20, false);
  two.insert(two.end(), 10, true);
  JunctionCounter plateaus;
  for (bool f : two) plateaus.update(f);
  CHECK(plateaus.count == 2);
  CHECK(roadnav::testing::scan_registrations(two, 3, 5) == 2);
}

TEST_CASE("junction counter rearm needs N consecutive negatives") {
  JunctionCounter jc(3, 5);
  for (bool f : flags_of("TTTFFFFTTT")) jc.update(f);
  CHECK(jc.count == 1);  // only four negatives between the runs
  for (bool f : flags_of("FFFFFTTT")) jc.update(f);
  CHECK(jc.count == 2);
  CHECK_THROWS_AS(JunctionCounter(0, 5), InvalidInput);
}

TEST_CASE("junction counter agrees with the run-scan oracle on random streams") {
  Rng rng(20240611);
  for (int t = 0; t < 1000; ++t) {
    const int m = rng.integer(1, 6), n = rng.integer(1, 8);
    const std::vector<bool> flags = roadnav::testing::random_flag_stream(rng, 40, 12);
    JunctionCounter jc(m, n);
    int prev = 0, newly = 0;
    for (bool f : flags) {
      newly += jc.update(f);
      REQUIRE(jc.count >= prev);
      REQUIRE(jc.consecutive_pos >= 0);
      REQUIRE(jc.consecutive_pos <= m);
      REQUIRE(jc.consecutive_neg >= 0);
      REQUIRE(jc.consecutive_neg <= n);
      prev = jc.count;
    }
    REQUIRE(jc.count == roadnav::testing::scan_registrations(flags, m, n));
    REQUIRE(newly == jc.count);
  }
}

TEST_CASE("plan_step examples") {
  NavConfig cfg;
  RoutePlan route{{{2, Turn::kLeft}}, 0};
  JunctionCounter jc;
  jc.count = 2;
  const VelocityCommand ov = plan_step(route, jc, {Action::kForward, false}, cfg, {false});
  CHECK(ov == VelocityCommand{cfg.v_turn, -cfg.yaw_rate, false});
  // Consumed directive falls through to the model's command.
  CHECK(plan_step(route, jc, {Action::kForward, false}, cfg, {true}) ==
        VelocityCommand{cfg.v_forward, 0.0, false});
  jc.count = 1;
  CHECK(plan_step(route, jc, {Action::kForward, false}, cfg, {false}) ==
        VelocityCommand{2.0, 0.0, false});
  CHECK(plan_step(route, jc, {Action::kHalt, false}, cfg, {false}) == VelocityCommand{0.0, 0.0, true});
  CHECK(plan_step(route, jc, {Action::kYawRight, false}, cfg, {false}) ==
        VelocityCommand{1.0, 1.57, false});
  RoutePlan bad{{{0, Turn::kLeft}}, 0};
  CHECK_THROWS_AS(plan_step(bad, jc, {}, cfg, {false}), InvalidRoute);
  CHECK_THROWS_AS(plan_step(route, jc, {}, cfg, {}), InvalidInput);
}

TEST_CASE("route plan JSON") {
  const RoutePlan r = RoutePlan::from_json(Json::parse(R"({"directives":[{"junction":2,"turn":"left"}],"terminal":"halt"})"));
  REQUIRE(r.directives.size() == 1);
  CHECK(r.directives[0] == Directive{2, Turn::kLeft});
  CHECK(RoutePlan::from_json(r.to_json()) == r);
  CHECK_THROWS_AS(RoutePlan::from_json(Json::parse(R"({"directives":[{"junction":0,"turn":"left"}]})")),
                  InvalidRoute);
  CHECK_THROWS_AS(RoutePlan::from_json(Json::parse(
                      R"({"directives":[{"junction":2,"turn":"left"},{"junction":2,"turn":"right"}]})")),
                  InvalidRoute);
  CHECK_THROWS_AS(RoutePlan::from_json(Json::parse(R"({"directives":[{"junction":1,"turn":"up"}]})")),
                  InvalidRoute);
  CHECK_THROWS_AS(RoutePlan::from_json(Json::parse(R"({"terminal":"land"})")), InvalidRoute);
}

TEST_CASE("run_controller examples") {
  NavConfig cfg;
  const ControllerRun fwd = run_controller(std::vector<ActionVector>(50, av(0.9, 0.1, 0.1, 0.1, 0.1)),
                                           RoutePlan{}, cfg);
  REQUIRE(fwd.commands.size() == 50);
  for (const VelocityCommand& v : fwd.commands) CHECK(v == VelocityCommand{2.0, 0.0, false});

  const ControllerRun empty = run_controller({}, RoutePlan{}, cfg);
  CHECK(empty.commands.empty());
  CHECK(empty.trace.empty());

  // One plateau, route (1, Right): one contiguous window of K yaw-right frames.
  std::vector<bool> flags(20, false);
  flags.insert(flags.end(), 8, true);
  flags.insert(flags.end(), 40, false);
  const ControllerRun run = run_controller(stream_from_flags(flags), RoutePlan{{{1, Turn::kRight}}, 0}, cfg);
  int override_frames = 0, windows = 0;
  for (std::size_t i = 0; i < run.trace.size(); ++i) {
    const bool on = run.trace[i].override_turn.has_value();
    if (on) {
      CHECK(*run.trace[i].override_turn == Turn::kRight);
      CHECK(run.commands[i] == VelocityCommand{1.0, 1.57, false});
      ++override_frames;
      if (i == 0 || !run.trace[i - 1].override_turn) ++windows;
    }
  }
  CHECK(windows == 1);
  CHECK(override_frames == cfg.override_frames);
  CHECK(run.trace.back().count == 1);
  // Registration on the third positive frame; the override starts there.
  CHECK(run.trace[22].registered);
  CHECK(run.trace[22].override_turn.has_value());
  CHECK_FALSE(run.trace[21].override_turn.has_value());
}

TEST_CASE("turn delay postpones the override") {
  NavConfig cfg;
  cfg.turn_delay_frames = 10;
  std::vector<bool> flags(5, false);
  flags.insert(flags.end(), 3, true);
  flags.insert(flags.end(), 40, false);
  const ControllerRun run = run_controller(stream_from_flags(flags), RoutePlan{{{1, Turn::kLeft}}, 0}, cfg);
  CHECK_FALSE(run.trace[16].override_turn.has_value());
  CHECK(run.trace[17].override_turn.has_value());
  CHECK(run.trace[17 + cfg.override_frames - 1].override_turn.has_value());
  CHECK_FALSE(run.trace[17 + cfg.override_frames].override_turn.has_value());
}

TEST_CASE("terminal junction and finish latch a hover") {
  NavConfig cfg;
  std::vector<bool> flags(3, true);
  flags.insert(flags.end(), 5, false);
  const ControllerRun run = run_controller(stream_from_flags(flags), RoutePlan{{}, 1}, cfg);
  for (std::size_t i = 2; i < run.trace.size(); ++i) {
    CHECK(run.trace[i].terminal);
    CHECK(run.commands[i] == VelocityCommand{0.0, 0.0, true});
  }
  Controller ctl(RoutePlan{}, cfg);
  ctl.step(av(0.9, 0.1, 0.1, 0.1, 0.1));
  ctl.finish();
  CHECK(ctl.step(av(0.9, 0.1, 0.1, 0.1, 0.1)).velocity.hover);
}

TEST_CASE("override windows never overlap and each registration consumes at most one directive") {
  Rng rng(77);
  for (int t = 0; t < 300; ++t) {
    NavConfig cfg;
    cfg.rise_frames = rng.integer(1, 4);
    cfg.rearm_frames = rng.integer(1, 6);
    cfg.override_frames = rng.integer(1, 40);
    cfg.turn_delay_frames = rng.integer(0, 20);
    RoutePlan route;
    int j = 0;
    const int directives = rng.integer(0, 6);
    for (int d = 0; d < directives; ++d) {
      j += rng.integer(1, 3);
      route.directives.push_back({j, static_cast<Turn>(rng.integer(0, 2))});
    }
    const std::vector<bool> flags = roadnav::testing::random_flag_stream(rng, 30, 10);
    Controller ctl(route, cfg);
    int registrations = 0;
    std::vector<NavRecord> trace;
    for (bool f : flags) {
      trace.push_back(ctl.step(av(0.9, 0.1, 0.1, 0.1, f ? 0.9 : 0.1)));
      registrations += trace.back().registered;
    }
    const auto& sched = ctl.schedule();
    REQUIRE(static_cast<int>(sched.size()) <= registrations);
    for (std::size_t a = 1; a < sched.size(); ++a) {
      REQUIRE(sched[a].registered_frame > sched[a - 1].registered_frame);
    }
    int last_end = -1;
    for (const auto& s : sched) {
      if (s.start_frame < 0) continue;
      REQUIRE(s.start_frame >= last_end);
      last_end = s.start_frame + cfg.override_frames;
    }
    for (const NavRecord& r : trace) {
      REQUIRE(r.velocity.forward_speed >= 0.0);
      REQUIRE(r.velocity.forward_speed <= 6.0);
      REQUIRE(std::abs(r.velocity.yaw_rate) <= cfg.yaw_rate);
      if (r.velocity.hover) REQUIRE((r.velocity.forward_speed == 0.0 && r.velocity.yaw_rate == 0.0));
    }
  }
}

TEST_CASE("velocity bounds over random action vectors and configs") {
  Rng rng(5);
  for (int t = 0; t < 5000; ++t) {
    NavConfig cfg;
    cfg.max_speed = rng.uniform(0.1, 6.0);
    cfg.v_forward = rng.uniform(0.0, cfg.max_speed);
    cfg.v_turn = rng.uniform(0.0, cfg.max_speed);
    REQUIRE_NOTHROW(cfg.validate());
    const VelocityCommand v = to_velocity(threshold_actions(roadnav::testing::random_action_vector(rng)).action, cfg);
    REQUIRE(v.forward_speed >= 0.0);
    REQUIRE(v.forward_speed <= 6.0);
  }
  NavConfig bad;
  bad.max_speed = 7.0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad = NavConfig{};
  bad.v_forward = 3.0;
  bad.max_speed = 2.5;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("nav config JSON round trip and unknown keys") {
  NavConfig c;
  c.rearm_frames = 60;
  c.turn_delay_frames = 57;
  const NavConfig back = NavConfig::from_json(c.to_json());
  CHECK(back.rearm_frames == 60);
  CHECK(back.turn_delay_frames == 57);
  CHECK_THROWS_AS(NavConfig::from_json(Json::parse(R"({"bogus":1})")), InvalidInput);
}

TEST_CASE("trace exports one JSON object per frame") {
  const ControllerRun run = run_controller(stream_from_flags(flags_of("FTTTFF")), RoutePlan{}, NavConfig{});
  const std::string jsonl = trace_to_jsonl(run.trace);
  int lines = 0;
  std::size_t pos = 0, next;
  while ((next = jsonl.find('\n', pos)) != std::string::npos) {
    const Json j = Json::parse(jsonl.substr(pos, next - pos));
    CHECK(j["frame"] == lines);
    pos = next + 1;
    ++lines;
  }
  CHECK(lines == 6);
}
