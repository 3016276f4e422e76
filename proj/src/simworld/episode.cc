#include "roadnav/simworld/episode.h"

#include <cmath>
#include <random>

#include "roadnav/common/error.h"

namespace roadnav::sim {

void EpisodeLog::validate() const {
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (!(records[i].timestamp > records[i - 1].timestamp)) {
      throw InvalidInput("episode: timestamps must increase strictly (record " + std::to_string(i) + ")");
    }
    if (records[i].frame_id <= records[i - 1].frame_id) {
      throw InvalidInput("episode: frame ids must increase (record " + std::to_string(i) + ")");
    }
  }
}

tomo::Image capture_frame(const RoadMap& map, const DronePose& pose, const CameraModel& cam) {
  return tomo::quantize8(render_view(map, pose, cam));
}

Json DemoConfig::to_json() const {
  return Json{{"camera", camera.to_json()},
              {"nav", nav.to_json()},
              {"oracle", oracle.to_json()},
              {"heading_noise", heading_noise},
              {"record_overrides", record_overrides}};
}

DemoConfig DemoConfig::from_json(const Json& j) {
  reject_unknown_keys(j, {"camera", "nav", "oracle", "heading_noise", "record_overrides"}, "demo");
  DemoConfig c;
  if (j.contains("camera")) c.camera = CameraModel::from_json(j.at("camera"));
  if (j.contains("nav")) c.nav = nav::NavConfig::from_json(j.at("nav"), simulator_nav_config());
  if (j.contains("oracle")) c.oracle = OracleParams::from_json(j.at("oracle"));
  c.heading_noise = j.value("heading_noise", c.heading_noise);
  if (!(c.heading_noise >= 0)) throw InvalidInput("demo: heading_noise must be >= 0");
  c.record_overrides = j.value("record_overrides", c.record_overrides);
  return c;
}

nav::NavConfig simulator_nav_config() {
  nav::NavConfig cfg;
  cfg.override_frames = 30;  // 1.57 rad/s for 1 s
  // Registration lands about 3.8 m before the node at 2 m/s.
  cfg.turn_delay_frames = 57;
  // Detections flicker while the view swings through a turn; 2 s of negatives
  // is still far shorter than the 60 m between junctions.
  cfg.rearm_frames = 60;
  return cfg;
}

EpisodeLog collect_demonstrations(const RoadMap& map, const Route& route, int n_frames,
                                  std::uint64_t seed, const DemoConfig& cfg) {
  if (n_frames < 1) throw InvalidInput("demo: n_frames must be >= 1");
  cfg.camera.validate();
  cfg.oracle.validate();
  DronePose pose = route.start_pose();
  if (!map.on_road(pose.position())) throw InvalidInput("demo: start pose is off-road");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  nav::Controller controller(route.plan(), cfg.nav);
  OracleState state{route.start_s};

  EpisodeLog log;
  log.map_seed = map.seed;
  log.episode_id = "map" + std::to_string(map.seed) + "-seed" + std::to_string(seed);
  for (int f = 0; f < n_frames; ++f) {
    EpisodeRecord rec;
    rec.frame_id = f;
    rec.pose = pose;
    rec.timestamp = f * kFrameDt;
    rec.image = capture_frame(map, pose, cfg.camera);
    rec.target = oracle_policy(map, pose, route, state, cfg.oracle);
    if (state.s >= route.goal_s) {
      log.records.push_back(std::move(rec));
      break;
    }

    const nav::NavRecord nr = controller.step(rec.target);
    if (!nr.override_turn || cfg.record_overrides) log.records.push_back(std::move(rec));
    pose = step_dynamics(pose, nr.velocity);
    if (cfg.heading_noise > 0) pose.heading += cfg.heading_noise * noise(rng);
    if (!map.in_world(pose.position()) || !map.on_road(pose.position())) {
      throw OracleOffRoad("demo: oracle left the road corridor at frame " + std::to_string(f + 1));
    }
  }
  return log;
}

}  // namespace roadnav::sim
