#include "roadnav/dataio/dataset.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "roadnav/common/error.h"

namespace roadnav::dataio {

void SplitSpec::validate() const {
  for (double f : {train, val, test}) {
    if (!(f >= 0.0) || f > 1.0) throw InvalidSplit("split: fractions must lie in [0, 1]");
  }
  if (std::abs(train + val + test - 1.0) > 1e-9) throw InvalidSplit("split: fractions must sum to 1");
}

Json SplitSpec::to_json() const {
  return Json{{"train", train}, {"val", val}, {"test", test}, {"seed", seed}, {"heldout_maps", heldout_maps}};
}

SplitSpec SplitSpec::from_json(const Json& j) {
  reject_unknown_keys(j, {"train", "val", "test", "seed", "heldout_maps"}, "split");
  SplitSpec s;
  s.train = j.value("train", s.train);
  s.val = j.value("val", s.val);
  s.test = j.value("test", s.test);
  s.seed = j.value("seed", s.seed);
  s.heldout_maps = j.value("heldout_maps", s.heldout_maps);
  s.validate();
  return s;
}

std::array<int, 3> split_counts(int n, const SplitSpec& spec) {
  spec.validate();
  const std::array<double, 3> f{spec.train, spec.val, spec.test};
  std::array<int, 3> c{};
  std::array<double, 3> rem{};
  int used = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = f[i] * n;
    c[i] = static_cast<int>(std::floor(exact + 1e-9));
    rem[i] = exact - c[i];
    used += c[i];
  }
  while (used < n) {
    int best = 0;
    for (int i = 1; i < 3; ++i) {
      if (rem[i] > rem[best] + 1e-12) best = i;
    }
    ++c[best];
    rem[best] = -1.0;
    ++used;
  }
  for (int i = 0; i < 3; ++i) {
    if (f[i] > 0 && c[i] == 0) throw InvalidSplit("split: a nonzero fraction received no units");
  }
  return c;
}

std::array<std::vector<std::size_t>, 3> partition_episodes(const std::vector<sim::EpisodeLog>& episodes,
                                                          const SplitSpec& split) {
  if (episodes.empty()) throw InvalidSplit("split: no episodes");
  std::set<std::string> ids;
  for (const auto& e : episodes) {
    if (!ids.insert(e.episode_id).second) throw InvalidSplit("split: duplicate episode id " + e.episode_id);
  }

  // Units are episodes, or groups of episodes sharing a map.
  std::vector<std::vector<std::size_t>> units;
  if (split.heldout_maps) {
    std::map<std::uint64_t, std::vector<std::size_t>> by_map;
    for (std::size_t i = 0; i < episodes.size(); ++i) by_map[episodes[i].map_seed].push_back(i);
    for (auto& [seed, members] : by_map) units.push_back(members);
  } else {
    for (std::size_t i = 0; i < episodes.size(); ++i) units.push_back({i});
  }
  const std::array<int, 3> counts = split_counts(static_cast<int>(units.size()), split);
  std::mt19937_64 rng(split.seed);
  std::shuffle(units.begin(), units.end(), rng);

  std::array<std::vector<std::size_t>, 3> out;
  std::size_t u = 0;
  for (int s = 0; s < 3; ++s) {
    for (int k = 0; k < counts[s]; ++k, ++u) out[s].insert(out[s].end(), units[u].begin(), units[u].end());
    std::sort(out[s].begin(), out[s].end());
  }
  return out;
}

Json SplitDataset::manifest() const {
  return Json{{"name", name},
              {"frames", data.count()},
              {"episodes", episode_ids},
              {"map_seeds", map_seeds},
              {"config_digest", to_hex(config_digest)}};
}

Json DatasetSplits::manifest() const {
  return Json{{"train", train.manifest()}, {"val", val.manifest()}, {"test", test.manifest()}};
}

DatasetSplits build_dataset(const std::vector<sim::EpisodeLog>& episodes, const SplitSpec& split,
                            const tomo::TomoConfig& cfg, FeatureCache& cache) {
  cfg.validate();
  const auto parts = partition_episodes(episodes, split);
  DatasetSplits out;
  SplitDataset* targets[3] = {&out.train, &out.val, &out.test};
  const char* names[3] = {"train", "val", "test"};
  for (int s = 0; s < 3; ++s) {
    SplitDataset& d = *targets[s];
    d.name = names[s];
    d.config_digest = cfg.digest();
    d.data.channels = 1;
    d.data.size = cfg.output_size;
    for (std::size_t idx : parts[s]) {
      const sim::EpisodeLog& ep = episodes[idx];
      d.episode_ids.push_back(ep.episode_id);
      d.map_seeds.push_back(ep.map_seed);
      const auto feats = cache_features(ep, cfg, cache);
      for (std::size_t r = 0; r < feats.size(); ++r) {
        if (feats[r].size() != d.data.sample_size()) throw StaleCache("dataset: cached feature has the wrong size");
        d.data.features.insert(d.data.features.end(), feats[r].begin(), feats[r].end());
        d.data.targets.push_back(ep.records[r].target);
      }
    }
  }
  return out;
}

void check_disjoint(const DatasetSplits& splits, bool heldout_maps) {
  std::map<std::string, std::string> owner;
  std::map<std::uint64_t, std::string> map_owner;
  for (const SplitDataset* d : {&splits.train, &splits.val, &splits.test}) {
    for (const std::string& id : d->episode_ids) {
      const auto [it, fresh] = owner.emplace(id, d->name);
      if (!fresh && it->second != d->name) {
        throw InvalidSplit("split leakage: episode " + id + " in " + it->second + " and " + d->name);
      }
    }
    if (!heldout_maps) continue;
    for (std::uint64_t m : d->map_seeds) {
      const auto [it, fresh] = map_owner.emplace(m, d->name);
      if (!fresh && it->second != d->name) {
        throw InvalidSplit("split leakage: map " + std::to_string(m) + " in " + it->second + " and " + d->name);
      }
    }
  }
}

}  // namespace roadnav::dataio
