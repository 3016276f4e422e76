#pragma once

#include <functional>
#include <string>
#include <vector>

#include "roadnav/common/json_util.h"
#include "roadnav/navigation/navigation.h"
#include "roadnav/nn/network.h"
#include "roadnav/simworld/episode.h"
#include "roadnav/tomography/tomography.h"

namespace roadnav::sim {

// Per-frame policy: camera frame and true pose in, ActionVector out. Learned
// policies ignore the pose.
using Policy = std::function<nn::ActionVector(const tomo::Image& frame, const DronePose& pose)>;

// featurize(frame) -> network forward. tomo.output_size must match the
// network input size.
Policy model_policy(const nn::Network& net, const tomo::TomoConfig& tomo);

// The oracle as a policy; it keeps its own route progress.
Policy oracle_as_policy(const RoadMap& map, const Route& route, const OracleParams& params = {});

struct RolloutConfig {
  CameraModel camera;
  nav::NavConfig nav = simulator_nav_config();
  int max_frames = 9000;
  // The run is abandoned once the drone is this far from the route.
  double lost_distance = 10.0;
  // A turn counts as placed correctly when its override starts within this
  // distance of the matching route junction.
  double turn_tolerance = 4.0;

  Json to_json() const;
  static RolloutConfig from_json(const Json& j);
};

struct TurnEvent {
  int junction = 0;  // directive ordinal
  nav::Turn turn = nav::Turn::kStraight;
  int registered_frame = 0;
  int start_frame = -1;  // -1 when the run ended before the override began
  double distance_to_node = -1.0;  // at start_frame
  bool correct = false;
};

struct RolloutReport {
  std::string termination;  // goal, max_frames, lost, out_of_world
  int frames = 0;
  double distance = 0.0;  // meters flown
  double route_length = 0.0;
  double progress = 0.0;  // meters of route covered
  int off_road_frames = 0;
  int off_route_frames = 0;
  int junctions_registered = 0;
  int junctions_ground_truth = 0;
  int turns_expected = 0;
  int turns_executed = 0;
  std::vector<TurnEvent> turns;
  bool completion = false;

  Json to_json() const;
};

struct RolloutResult {
  RolloutReport report;
  std::vector<nav::NavRecord> trace;
  std::vector<DronePose> poses;  // pose at the start of each traced frame
  double mean_latency_ms = 0.0;  // policy calls only
};

// render -> policy -> Controller -> step_dynamics until the goal, the frame
// budget, or the drone gets lost. Completion requires reaching the goal with
// no off-road frame, every junction registered and every turn placed at its
// junction.
RolloutResult rollout(const RoadMap& map, const Route& route, const Policy& policy,
                      const RolloutConfig& cfg);

std::string rollout_trace_jsonl(const RolloutResult& r);

}  // namespace roadnav::sim
