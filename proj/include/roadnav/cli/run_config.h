#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "roadnav/common/json_util.h"
#include "roadnav/dataio/dataset.h"
#include "roadnav/navigation/navigation.h"
#include "roadnav/nn/train.h"
#include "roadnav/simworld/episode.h"
#include "roadnav/simworld/rollout.h"
#include "roadnav/tomography/tomography.h"

namespace roadnav::cli {

// Every tunable of the pipeline in one canonical JSON document. Sections are
// optional on input (defaults fill the gaps); unknown keys are rejected at
// every level. Commands write the fully resolved form next to their outputs.
struct RunConfig {
  std::uint64_t seed = 1;

  // Scenario: the map comes from world_file when set, else from
  // generate_map(map_seed, world).
  sim::MapParams world;
  std::string world_file;
  std::uint64_t map_seed = 1;
  std::uint64_t route_seed = 1;
  sim::RouteParams route;
  sim::DemoConfig demo;
  int demo_frames = 20000;

  tomo::TomoConfig tomo;
  std::string preset = "tiny";
  std::uint64_t network_seed = 1;
  nn::TrainHyper train;
  dataio::SplitSpec split;
  std::vector<std::string> episodes;  // episode directories
  std::string cache;                  // feature cache directory; empty: <run>/cache

  sim::RolloutConfig rollout;
  double threshold = 0.5;

  Json to_json() const;
  static RunConfig from_json(const Json& j);
  Digest digest() const { return json_digest(to_json()); }
};

// Defaults tuned for the tiny preset: 32 px features, 60 angles.
RunConfig default_run_config();

RunConfig load_run_config(const std::string& path);

}  // namespace roadnav::cli
