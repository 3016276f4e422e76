#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "roadnav/common/json_util.h"
#include "roadnav/navigation/navigation.h"
#include "roadnav/nn/network.h"
#include "roadnav/simworld/oracle.h"
#include "roadnav/simworld/pose.h"
#include "roadnav/simworld/render.h"
#include "roadnav/simworld/route.h"
#include "roadnav/tomography/image.h"

namespace roadnav::sim {

struct EpisodeRecord {
  int frame_id = 0;
  tomo::Image image;  // 8-bit quantized
  nn::ActionVector target{};
  DronePose pose;
  double timestamp = 0.0;  // seconds

  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

struct EpisodeLog {
  std::string episode_id;
  std::uint64_t map_seed = 0;
  std::vector<EpisodeRecord> records;

  // InvalidInput on a non-increasing timestamp or frame id.
  void validate() const;
  friend bool operator==(const EpisodeLog&, const EpisodeLog&) = default;
};

// Camera frame as logged: rendered, then quantized to 8 bits.
tomo::Image capture_frame(const RoadMap& map, const DronePose& pose, const CameraModel& cam);

// Navigation constants used when a Controller drives the drone through the
// simulated junctions: one override spans a quarter turn and starts when the
// drone reaches the node it registered.
nav::NavConfig simulator_nav_config();

struct DemoConfig {
  CameraModel camera;
  nav::NavConfig nav = simulator_nav_config();
  OracleParams oracle;
  // Per-frame Gaussian heading disturbance applied after each step (radians);
  // 0 records the clean oracle.
  double heading_noise = 0.0;
  // Frames flown under a pre-programmed turn are skipped by default: the model
  // is suspended there, and their yaw labels depend on the route, not the view.
  bool record_overrides = false;

  Json to_json() const;
  static DemoConfig from_json(const Json& j);
};

// Closed loop: render, label with the oracle, feed the label to a Controller
// holding route.plan(), step the dynamics. Stops at the goal or after
// n_frames simulated frames; frame_id is the simulated frame index.
// OracleOffRoad when the drone leaves the corridor.
EpisodeLog collect_demonstrations(const RoadMap& map, const Route& route, int n_frames,
                                  std::uint64_t seed, const DemoConfig& cfg);

}  // namespace roadnav::sim
