#include "roadnav/cli/run_config.h"

#include "roadnav/common/error.h"
#include "roadnav/nn/spec.h"

namespace roadnav::cli {

RunConfig default_run_config() {
  RunConfig c;
  c.tomo.output_size = 32;
  c.tomo.num_angles = 60;
  return c;
}

Json RunConfig::to_json() const {
  return Json{{"seed", seed},
              {"world", world.to_json()},
              {"scenario", Json{{"world_file", world_file}, {"map_seed", map_seed}, {"route_seed", route_seed}}},
              {"route", route.to_json()},
              {"demo", Json{{"config", demo.to_json()}, {"frames", demo_frames}}},
              {"tomo", tomo.to_json()},
              {"network", Json{{"preset", preset}, {"seed", network_seed}}},
              {"train", train.to_json()},
              {"split", split.to_json()},
              {"data", Json{{"episodes", episodes}, {"cache", cache}}},
              {"rollout", rollout.to_json()},
              {"eval", Json{{"threshold", threshold}}}};
}

RunConfig RunConfig::from_json(const Json& j) {
  if (!j.is_object()) throw InvalidInput("config: expected a JSON object");
  reject_unknown_keys(j, {"seed", "world", "scenario", "route", "demo", "tomo", "network", "train", "split", "data",
                          "rollout", "eval"},
                      "config");
  RunConfig c = default_run_config();
  try {
    c.seed = j.value("seed", c.seed);
    if (j.contains("world")) c.world = sim::MapParams::from_json(j.at("world"));
    if (j.contains("scenario")) {
      const Json& sc = j.at("scenario");
      reject_unknown_keys(sc, {"world_file", "map_seed", "route_seed"}, "config.scenario");
      c.world_file = sc.value("world_file", c.world_file);
      c.map_seed = sc.value("map_seed", c.map_seed);
      c.route_seed = sc.value("route_seed", c.route_seed);
    }
    if (j.contains("route")) c.route = sim::RouteParams::from_json(j.at("route"));
    if (j.contains("demo")) {
      const Json& d = j.at("demo");
      reject_unknown_keys(d, {"config", "frames"}, "config.demo");
      if (d.contains("config")) c.demo = sim::DemoConfig::from_json(d.at("config"));
      c.demo_frames = d.value("frames", c.demo_frames);
      if (c.demo_frames < 1) throw InvalidInput("config.demo: frames must be >= 1");
    }
    if (j.contains("tomo")) c.tomo = tomo::TomoConfig::from_json(j.at("tomo"));
    if (j.contains("network")) {
      const Json& n = j.at("network");
      reject_unknown_keys(n, {"preset", "seed"}, "config.network");
      c.preset = n.value("preset", c.preset);
      c.network_seed = n.value("seed", c.network_seed);
      nn::preset(c.preset);  // rejects unknown names
    }
    if (j.contains("train")) c.train = nn::TrainHyper::from_json(j.at("train"));
    if (j.contains("split")) c.split = dataio::SplitSpec::from_json(j.at("split"));
    if (j.contains("data")) {
      const Json& d = j.at("data");
      reject_unknown_keys(d, {"episodes", "cache"}, "config.data");
      c.episodes = d.value("episodes", c.episodes);
      c.cache = d.value("cache", c.cache);
    }
    if (j.contains("rollout")) c.rollout = sim::RolloutConfig::from_json(j.at("rollout"));
    if (j.contains("eval")) {
      const Json& e = j.at("eval");
      reject_unknown_keys(e, {"threshold"}, "config.eval");
      c.threshold = e.value("threshold", c.threshold);
      if (!(c.threshold > 0 && c.threshold < 1)) throw InvalidInput("config.eval: threshold must be in (0, 1)");
    }
  } catch (const Json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::string& path) { return RunConfig::from_json(read_json_file(path)); }

}  // namespace roadnav::cli
