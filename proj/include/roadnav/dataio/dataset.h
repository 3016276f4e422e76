#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "roadnav/common/digest.h"
#include "roadnav/common/json_util.h"
#include "roadnav/dataio/feature_cache.h"
#include "roadnav/nn/train.h"
#include "roadnav/simworld/episode.h"
#include "roadnav/tomography/tomography.h"

namespace roadnav::dataio {

struct SplitSpec {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
  std::uint64_t seed = 1;
  // Split whole maps instead of episodes, so no map contributes to two splits.
  bool heldout_maps = false;

  void validate() const;  // InvalidSplit
  Json to_json() const;
  static SplitSpec from_json(const Json& j);
};

// Largest-remainder apportionment of n units over the three fractions; ties
// go to the earlier split. InvalidSplit when a nonzero fraction gets nothing.
std::array<int, 3> split_counts(int n, const SplitSpec& spec);

struct SplitDataset {
  std::string name;  // train, val or test
  nn::Dataset data;
  std::vector<std::string> episode_ids;
  std::vector<std::uint64_t> map_seeds;
  Digest config_digest{};

  Json manifest() const;  // everything except the features
};

struct DatasetSplits {
  SplitDataset train, val, test;
  Json manifest() const;
};

// Episode-level (or map-level) seeded partition. Features come from the cache.
DatasetSplits build_dataset(const std::vector<sim::EpisodeLog>& episodes, const SplitSpec& split,
                            const tomo::TomoConfig& cfg, FeatureCache& cache);

// Episode indices per split, without featurizing.
std::array<std::vector<std::size_t>, 3> partition_episodes(const std::vector<sim::EpisodeLog>& episodes,
                                                          const SplitSpec& split);

// InvalidSplit when an episode id (or, with heldout maps, a map seed) shows up
// in more than one split.
void check_disjoint(const DatasetSplits& splits, bool heldout_maps);

}  // namespace roadnav::dataio
