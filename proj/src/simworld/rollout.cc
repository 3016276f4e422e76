#include "roadnav/simworld/rollout.h"

#include <chrono>
#include <memory>

#include "roadnav/common/error.h"

namespace roadnav::sim {

Policy model_policy(const nn::Network& net, const tomo::TomoConfig& tomo) {
  if (tomo.output_size != net.spec().input_size || net.spec().input_channels != 1) {
    throw InvalidShape("rollout: feature size does not match the network input");
  }
  return [&net, tomo](const tomo::Image& frame, const DronePose&) {
    const tomo::Image feat = tomo::featurize(frame, tomo);
    return net.predict(feat.data);
  };
}

Policy oracle_as_policy(const RoadMap& map, const Route& route, const OracleParams& params) {
  auto state = std::make_shared<OracleState>(OracleState{route.start_s});
  return [&map, &route, params, state](const tomo::Image&, const DronePose& pose) {
    return oracle_policy(map, pose, route, *state, params);
  };
}

Json RolloutConfig::to_json() const {
  return Json{{"camera", camera.to_json()},
              {"nav", nav.to_json()},
              {"max_frames", max_frames},
              {"lost_distance", lost_distance},
              {"turn_tolerance", turn_tolerance}};
}

RolloutConfig RolloutConfig::from_json(const Json& j) {
  reject_unknown_keys(j, {"camera", "nav", "max_frames", "lost_distance", "turn_tolerance"}, "rollout");
  RolloutConfig c;
  if (j.contains("camera")) c.camera = CameraModel::from_json(j.at("camera"));
  if (j.contains("nav")) c.nav = nav::NavConfig::from_json(j.at("nav"), simulator_nav_config());
  c.max_frames = j.value("max_frames", c.max_frames);
  c.lost_distance = j.value("lost_distance", c.lost_distance);
  c.turn_tolerance = j.value("turn_tolerance", c.turn_tolerance);
  if (c.max_frames < 1 || !(c.lost_distance > 0) || !(c.turn_tolerance > 0)) {
    throw InvalidInput("rollout: parameters out of range");
  }
  return c;
}

Json RolloutReport::to_json() const {
  Json ts = Json::array();
  for (const TurnEvent& t : turns) {
    ts.push_back(Json{{"junction", t.junction},
                      {"turn", std::string(nav::to_string(t.turn))},
                      {"registered_frame", t.registered_frame},
                      {"start_frame", t.start_frame},
                      {"distance_to_node", t.distance_to_node},
                      {"correct", t.correct}});
  }
  return Json{{"termination", termination},
              {"frames", frames},
              {"distance_m", distance},
              {"route_length_m", route_length},
              {"progress_m", progress},
              {"off_road_frames", off_road_frames},
              {"off_route_frames", off_route_frames},
              {"junctions_registered", junctions_registered},
              {"junctions_ground_truth", junctions_ground_truth},
              {"turns_expected", turns_expected},
              {"turns_executed", turns_executed},
              {"turns", ts},
              {"completion", completion}};
}

RolloutResult rollout(const RoadMap& map, const Route& route, const Policy& policy,
                      const RolloutConfig& cfg) {
  cfg.camera.validate();
  RolloutResult res;
  RolloutReport& rep = res.report;
  rep.route_length = route.length();
  rep.junctions_ground_truth = static_cast<int>(route.junctions.size());
  for (const RouteJunction& j : route.junctions) rep.turns_expected += j.turn != nav::Turn::kStraight;

  nav::Controller controller(route.plan(), cfg.nav);
  OracleState progress{route.start_s};
  DronePose pose = route.start_pose();
  double latency_total = 0.0;
  rep.termination = "max_frames";

  for (int f = 0; f < cfg.max_frames; ++f) {
    if (!map.in_world(pose.position())) {
      rep.termination = "out_of_world";
      break;
    }
    const Projection pr = track_progress(route, pose, progress);
    if (pr.distance > cfg.lost_distance) {
      rep.termination = "lost";
      break;
    }
    if (progress.s >= route.goal_s) {
      controller.finish();
      rep.termination = "goal";
      break;
    }
    if (!map.on_road(pose.position())) ++rep.off_road_frames;
    if (pr.distance > map.road_half_width) ++rep.off_route_frames;

    const tomo::Image frame = capture_frame(map, pose, cfg.camera);
    const auto t0 = std::chrono::steady_clock::now();
    const nn::ActionVector av = policy(frame, pose);
    latency_total += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    nav::NavRecord rec = controller.step(av);
    const DronePose next = step_dynamics(pose, rec.velocity);
    rep.distance += (next.position() - pose.position()).norm();
    res.poses.push_back(pose);
    res.trace.push_back(std::move(rec));
    pose = next;
    ++rep.frames;
  }

  rep.progress = std::max(0.0, std::min(progress.s, route.goal_s) - route.start_s);
  rep.junctions_registered = controller.count();
  for (const nav::Controller::Scheduled& s : controller.schedule()) {
    if (s.directive.turn == nav::Turn::kStraight) continue;
    TurnEvent ev;
    ev.junction = s.directive.junction;
    ev.turn = s.directive.turn;
    ev.registered_frame = s.registered_frame;
    if (s.start_frame >= 0 && s.start_frame < rep.frames) {
      ev.start_frame = s.start_frame;
      ++rep.turns_executed;
      const Vec2 node = map.junctions[route.junctions[ev.junction - 1].node].position;
      ev.distance_to_node = (res.poses[s.start_frame].position() - node).norm();
      ev.correct = ev.distance_to_node <= cfg.turn_tolerance;
    }
    rep.turns.push_back(ev);
  }
  bool turns_ok = rep.turns_executed == rep.turns_expected;
  for (const TurnEvent& t : rep.turns) turns_ok = turns_ok && t.correct;
  rep.completion = rep.termination == "goal" && rep.off_road_frames == 0 &&
                   rep.junctions_registered == rep.junctions_ground_truth && turns_ok;
  res.mean_latency_ms = rep.frames > 0 ? latency_total / rep.frames : 0.0;
  return res;
}

std::string rollout_trace_jsonl(const RolloutResult& r) {
  std::string out;
  for (std::size_t i = 0; i < r.trace.size(); ++i) {
    Json j = r.trace[i].to_json();
    j["pose"] = r.poses[i].to_json();
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace roadnav::sim
