#include "roadnav/cli/commands.h"

#include <omp.h>

#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>

#include "CLI11.hpp"
#include "roadnav/cli/run_config.h"
#include "roadnav/common/error.h"
#include "roadnav/dataio/dataset.h"
#include "roadnav/dataio/episode_io.h"
#include "roadnav/dataio/feature_cache.h"
#include "roadnav/metrics/benchmark.h"
#include "roadnav/metrics/metrics.h"
#include "roadnav/nn/train.h"
#include "roadnav/nn/weights_io.h"
#include "roadnav/simworld/rollout.h"
#include "roadnav/tomography/io.h"

namespace roadnav::cli {
namespace {

namespace fs = std::filesystem;

constexpr const char* kConfigFile = "config.json";
constexpr const char* kWeightsFile = "weights.mavw";
constexpr const char* kReportFile = "report.json";
constexpr const char* kTraceFile = "trace.jsonl";
constexpr const char* kSplitFile = "split.json";
constexpr const char* kCheckpointDir = "checkpoint";

// Raised from the epoch callback to emulate an interrupted run.
struct StopRequested {};

RunConfig resolve(const std::string& path) {
  return path.empty() ? default_run_config() : load_run_config(path);
}

sim::RoadMap load_world(const RunConfig& c) {
  if (!c.world_file.empty()) return sim::RoadMap::from_json(read_json_file(c.world_file));
  return sim::generate_map(c.map_seed, c.world);
}

void write_config(const fs::path& dir, const RunConfig& c) {
  fs::create_directories(dir);
  write_json_file(dir / kConfigFile, c.to_json());
}

nn::NetworkSpec checked_spec(const RunConfig& c) {
  nn::NetworkSpec spec = nn::preset(c.preset);
  if (spec.input_size != c.tomo.output_size) {
    throw InvalidInput("config: tomo.output_size " + std::to_string(c.tomo.output_size) +
                       " does not match the " + c.preset + " input size " +
                       std::to_string(spec.input_size));
  }
  return spec;
}

fs::path cache_dir(const RunConfig& c, const fs::path& run) {
  return c.cache.empty() ? run / "cache" : fs::path(c.cache);
}

std::vector<sim::EpisodeLog> load_episodes(const std::vector<std::string>& dirs) {
  std::vector<sim::EpisodeLog> out;
  for (const std::string& d : dirs) out.push_back(dataio::load_episode(d));
  return out;
}

// Velocity tensors travel in the weights container; batchnorm slots get zero
// running statistics so the slot layout matches the network.
std::string encode_velocity(const nn::Network& net, const std::vector<nn::LayerParams>& velocity) {
  std::vector<nn::LayerParams> slots = velocity;
  if (slots.empty()) {
    for (const nn::LayerParams& p : net.params()) {
      slots.push_back({nn::Tensor(p.weights.shape), nn::Tensor(p.bias.shape), {}, {}});
    }
  }
  for (std::size_t s = 0; s < slots.size(); ++s) {
    slots[s].running_mean = nn::Tensor(net.params()[s].running_mean.shape);
    slots[s].running_var = nn::Tensor(net.params()[s].running_var.shape);
  }
  return nn::encode_weights(nn::Network(net.spec(), slots, net.seed()));
}

std::vector<nn::LayerParams> decode_velocity(const std::string& bytes, const nn::NetworkSpec& spec) {
  std::vector<nn::LayerParams> v = nn::decode_weights(bytes, spec).params();
  for (nn::LayerParams& p : v) p.running_mean = p.running_var = nn::Tensor();
  return v;
}

nn::EpochStats epoch_from_json(const Json& j) {
  nn::EpochStats e;
  e.epoch = j.at("epoch").get<int>();
  e.loss = j.at("loss").get<double>();
  e.head_accuracy = j.at("head_accuracy").get<std::array<double, nn::kNumHeads>>();
  if (j.contains("val_loss")) {
    e.val_loss = j.at("val_loss").get<double>();
    e.val_head_accuracy = j.at("val_head_accuracy").get<std::array<double, nn::kNumHeads>>();
  }
  return e;
}

void save_checkpoint(const fs::path& dir, const nn::Network& net, const nn::TrainState& st,
                     const RunConfig& c) {
  fs::create_directories(dir);
  write_file_atomic(dir / kWeightsFile, nn::encode_weights(net));
  write_file_atomic(dir / "velocity.mavw", encode_velocity(net, st.velocity));
  write_json_file(dir / "state.json", Json{{"epoch", st.epoch},
                                           {"lr", st.lr},
                                           {"has_velocity", !st.velocity.empty()},
                                           {"report", st.report.to_json()},
                                           {"config_digest", to_hex(c.digest())}});
}

nn::TrainState load_checkpoint(const fs::path& dir, nn::Network& net, const RunConfig& c) {
  const Json j = read_json_file(dir / "state.json");
  if (j.at("config_digest").get<std::string>() != to_hex(c.digest())) {
    throw InvalidInput("train: checkpoint was written under a different config");
  }
  net = nn::decode_weights(read_text_file(dir / kWeightsFile), net.spec());
  nn::TrainState st;
  st.epoch = j.at("epoch").get<int>();
  st.lr = j.at("lr").get<double>();
  if (j.at("has_velocity").get<bool>()) {
    st.velocity = decode_velocity(read_text_file(dir / "velocity.mavw"), net.spec());
  }
  for (const Json& e : j.at("report").at("epochs")) st.report.epochs.push_back(epoch_from_json(e));
  return st;
}

std::vector<tomo::Image> split_frames(const std::vector<sim::EpisodeLog>& episodes,
                                      const std::vector<std::string>& ids, std::size_t limit) {
  const std::set<std::string> wanted(ids.begin(), ids.end());
  std::vector<tomo::Image> frames;
  for (const sim::EpisodeLog& e : episodes) {
    if (!wanted.count(e.episode_id)) continue;
    for (const sim::EpisodeRecord& r : e.records) {
      if (frames.size() >= limit) return frames;
      frames.push_back(r.image);
    }
  }
  return frames;
}

metrics::FramePipeline featurize_forward(const nn::Network& net, const tomo::TomoConfig& tc) {
  return [&net, tc](const tomo::Image& frame) {
    const tomo::Image feat = tomo::featurize(frame, tc);
    const nn::ActionVector av = net.predict(feat.data);
    if (!std::isfinite(av[0])) throw InvalidInput("bench: non-finite output");
  };
}

// ---- subcommands ----

struct Options {
  std::string config;
  std::string out;
  std::string world;
  std::string run;
  std::string weights;
  std::string in;
  std::string cache;
  std::string split = "test";
  std::string preset;
  std::string interp = "linear";
  std::string filter = "ramp";
  std::vector<std::string> episodes;
  std::uint64_t seed = 0, map_seed = 0, route_seed = 0;
  int frames = 0, angles = 90, offsets = 0, size = 0, warmup = 10, stop_after = 0, max_frames = 0;
  bool resume = false, oracle = false, assert_ = false, bench = false;
  double min_f = -1, min_accuracy = -1, min_agreement = -1;
};

int cmd_gen_world(const Options& o, CLI::App& sub, std::ostream& out) {
  RunConfig c = resolve(o.config);
  if (sub.count("--seed")) c.map_seed = o.seed;
  const sim::RoadMap map = sim::generate_map(c.map_seed, c.world);
  write_json_file(o.out, map.to_json());
  out << "world: " << map.junctions.size() << " junctions, " << map.segments.size() << " roads -> "
      << o.out << "\n";
  return kExitOk;
}

void apply_scenario(const Options& o, CLI::App& sub, RunConfig& c) {
  if (sub.count("--world")) c.world_file = o.world;
  if (sub.count("--map-seed")) {
    c.map_seed = o.map_seed;
    c.world_file.clear();
  }
  if (sub.count("--route-seed")) c.route_seed = o.route_seed;
  if (sub.count("--seed")) c.seed = o.seed;
}

int cmd_demo(const Options& o, CLI::App& sub, std::ostream& out) {
  RunConfig c = resolve(o.config);
  apply_scenario(o, sub, c);
  if (sub.count("--frames")) c.demo_frames = o.frames;
  const sim::RoadMap map = load_world(c);
  const sim::Route route = sim::plan_route(map, c.route_seed, c.route);
  sim::EpisodeLog log = sim::collect_demonstrations(map, route, c.demo_frames, c.seed, c.demo);
  log.episode_id = "m" + std::to_string(map.seed) + "-r" + std::to_string(c.route_seed) + "-s" +
                   std::to_string(c.seed);
  dataio::save_episode(log, o.out, Json{{"route", route.to_json()}, {"world_digest", to_hex(json_digest(map.to_json()))}});
  write_config(o.out, c);
  out << "demo: " << log.records.size() << " frames, route " << route.length() << " m -> " << o.out << "\n";
  return kExitOk;
}

int cmd_featurize(const Options& o, std::ostream& out) {
  RunConfig c = resolve(o.config);
  if (o.cache.empty() && c.cache.empty()) throw InvalidInput("featurize: no cache directory given");
  dataio::FeatureCache cache(o.cache.empty() ? c.cache : o.cache);
  std::size_t frames = 0;
  for (const std::string& d : o.episodes) frames += dataio::cache_features(dataio::load_episode(d), c.tomo, cache).size();
  const dataio::CacheStats& s = cache.stats();
  out << "featurize: " << frames << " frames, hits " << s.hits << ", computed " << s.featurize_calls
      << ", stale " << s.stale << "\n";
  return kExitOk;
}

int cmd_train(const Options& o, CLI::App& sub, std::ostream& out) {
  RunConfig c = resolve(o.config);
  if (sub.count("--episodes")) c.episodes = o.episodes;
  const fs::path run = o.run;
  const nn::NetworkSpec spec = checked_spec(c);
  const std::vector<sim::EpisodeLog> episodes = load_episodes(c.episodes);
  dataio::FeatureCache cache(cache_dir(c, run));
  const dataio::DatasetSplits splits = dataio::build_dataset(episodes, c.split, c.tomo, cache);
  dataio::check_disjoint(splits, c.split.heldout_maps);
  if (splits.train.data.count() == 0) throw InvalidInput("train: empty training split");

  write_config(run, c);
  write_json_file(run / kSplitFile, splits.manifest());
  nn::Network net = nn::build_network(spec, c.network_seed);
  nn::TrainState st = nn::initial_train_state(c.train);
  if (o.resume) st = load_checkpoint(run / kCheckpointDir, net, c);

  const nn::Dataset* val = splits.val.data.count() > 0 ? &splits.val.data : nullptr;
  try {
    nn::train_resumable(net, splits.train.data, c.train, st, val,
                        [&](const nn::EpochStats& e, const nn::TrainState& s) {
                          save_checkpoint(run / kCheckpointDir, net, s, c);
                          out << "epoch " << e.epoch << " loss " << e.loss << "\n";
                          if (o.stop_after > 0 && s.epoch >= o.stop_after && s.epoch < c.train.epochs) {
                            throw StopRequested{};
                          }
                        });
  } catch (const StopRequested&) {
    out << "train: stopped after epoch " << st.epoch << "; resume with --resume\n";
    return kExitOk;
  }
  nn::save_weights(net, run / kWeightsFile);
  write_json_file(run / kReportFile, Json{{"train", st.report.to_json()},
                                          {"frames", {{"train", splits.train.data.count()},
                                                      {"val", splits.val.data.count()},
                                                      {"test", splits.test.data.count()}}},
                                          {"layers", spec.weight_layer_count()},
                                          {"parameters", nn::count_params(net)},
                                          {"weights_sha256", to_hex(sha256(nn::encode_weights(net)))},
                                          {"config_digest", to_hex(c.digest())}});
  out << "train: " << st.report.epochs.size() << " epochs -> " << (run / kWeightsFile).string() << "\n";
  return kExitOk;
}

// Episode ids recorded for `name` in a split manifest.
std::set<std::string> manifest_ids(const Json& manifest, const char* name) {
  std::set<std::string> ids;
  if (manifest.contains(name)) {
    for (const Json& id : manifest.at(name).at("episodes")) ids.insert(id.get<std::string>());
  }
  return ids;
}

int cmd_eval(const Options& o, std::ostream& out, std::ostream& err) {
  const fs::path run = o.run;
  RunConfig c = o.config.empty() ? load_run_config((run / kConfigFile).string()) : load_run_config(o.config);
  if (!o.episodes.empty()) c.episodes = o.episodes;
  const nn::NetworkSpec spec = checked_spec(c);
  const std::vector<sim::EpisodeLog> episodes = load_episodes(c.episodes);
  dataio::FeatureCache cache(cache_dir(c, run));
  const dataio::DatasetSplits splits = dataio::build_dataset(episodes, c.split, c.tomo, cache);
  dataio::check_disjoint(splits, c.split.heldout_maps);

  const dataio::SplitDataset* chosen = nullptr;
  if (o.split == "train") chosen = &splits.train;
  else if (o.split == "val") chosen = &splits.val;
  else if (o.split == "test") chosen = &splits.test;
  else throw InvalidInput("eval: unknown split '" + o.split + "'");

  // The evaluated split must not contain episodes the run trained on.
  if (fs::exists(run / kSplitFile) && o.split != "train") {
    const std::set<std::string> trained = manifest_ids(read_json_file(run / kSplitFile), "train");
    for (const std::string& id : chosen->episode_ids) {
      if (trained.count(id)) throw InvalidSplit("split leakage: " + id + " was used for training");
    }
  }
  if (chosen->data.count() == 0) throw InvalidInput("eval: split '" + o.split + "' is empty");

  const fs::path weights = o.weights.empty() ? run / kWeightsFile : fs::path(o.weights);
  const nn::Network net = nn::load_weights(weights, spec);
  const auto pred = nn::predict_all(net, chosen->data);
  std::vector<nn::ActionVector> targets(chosen->data.targets.begin(), chosen->data.targets.end());
  metrics::MetricsReport rep = metrics::evaluate_predictions(pred, targets, c.threshold);
  rep.layers = spec.weight_layer_count();
  rep.parameters = static_cast<std::int64_t>(nn::count_params(net));
  if (o.bench) {
    const auto frames = split_frames(episodes, chosen->episode_ids, 100);
    rep.latency = metrics::fps_benchmark(featurize_forward(net, c.tomo), frames, o.warmup);
  }

  const fs::path dir = o.out.empty() ? run / "eval" : fs::path(o.out);
  write_config(dir, c);
  Json report = rep.to_json();
  report["split"] = o.split;
  report["episodes"] = chosen->episode_ids;
  write_json_file(dir / kReportFile, report);
  out << metrics::format_table({{c.preset, rep}});

  if (!o.assert_) return kExitOk;
  bool ok = true;
  if (o.min_f >= 0 && !(rep.f_measure && *rep.f_measure >= o.min_f)) {
    err << "assert: junction F-measure below " << o.min_f << "\n";
    ok = false;
  }
  if (o.min_accuracy >= 0 && rep.accuracy < o.min_accuracy) {
    err << "assert: junction accuracy below " << o.min_accuracy << "\n";
    ok = false;
  }
  if (o.min_agreement >= 0 && rep.action_agreement < o.min_agreement) {
    err << "assert: action agreement below " << o.min_agreement << "\n";
    ok = false;
  }
  return ok ? kExitOk : kExitAssert;
}

int cmd_rollout(const Options& o, CLI::App& sub, std::ostream& out) {
  RunConfig c = resolve(o.config);
  apply_scenario(o, sub, c);
  if (sub.count("--max-frames")) c.rollout.max_frames = o.max_frames;
  if (o.oracle == !o.weights.empty()) throw InvalidInput("rollout: give exactly one of --weights and --oracle");
  const sim::RoadMap map = load_world(c);
  const sim::Route route = sim::plan_route(map, c.route_seed, c.route);

  std::optional<nn::Network> net;
  sim::Policy policy;
  if (o.oracle) {
    policy = sim::oracle_as_policy(map, route, c.demo.oracle);
  } else {
    net.emplace(nn::load_weights(o.weights, checked_spec(c)));
    policy = sim::model_policy(*net, c.tomo);
  }
  const sim::RolloutResult res = sim::rollout(map, route, policy, c.rollout);
  const fs::path dir = o.out;
  write_config(dir, c);
  write_json_file(dir / kReportFile, res.report.to_json());
  write_file_atomic(dir / kTraceFile, sim::rollout_trace_jsonl(res));
  write_json_file(dir / "timing.json", Json{{"mean_latency_ms", res.mean_latency_ms}});
  out << "rollout: " << res.report.termination << ", completion " << (res.report.completion ? "true" : "false")
      << ", " << res.report.distance << " m\n";
  if (o.assert_ && !res.report.completion) return kExitAssert;
  return kExitOk;
}

int cmd_bench(const Options& o, CLI::App& sub, std::ostream& out) {
  RunConfig c = resolve(o.config);
  if (!o.preset.empty()) c.preset = o.preset;
  const nn::NetworkSpec spec = nn::preset(c.preset);
  c.tomo.output_size = spec.input_size;
  const nn::Network net =
      o.weights.empty() ? nn::build_network(spec, c.network_seed) : nn::load_weights(o.weights, spec);

  const sim::RoadMap map = load_world(c);
  const sim::Route route = sim::plan_route(map, c.route_seed, c.route);
  const int n = sub.count("--frames") ? o.frames : 100;
  if (n < 1) throw InvalidInput("bench: --frames must be >= 1");
  std::vector<tomo::Image> frames;
  for (int i = 0; i < n; ++i) {
    const double s = route.start_s + (route.length() * i) / n;
    const sim::Vec2 p = route.path.point_at(s);
    const sim::Vec2 t = route.path.tangent_at(s);
    frames.push_back(sim::capture_frame(map, {p.x, p.y, std::atan2(t.y, t.x)}, c.rollout.camera));
  }
  metrics::MetricsReport rep;
  rep.latency = metrics::fps_benchmark(featurize_forward(net, c.tomo), frames, o.warmup);
  rep.layers = spec.weight_layer_count();
  rep.parameters = static_cast<std::int64_t>(nn::count_params(net));
  // Quality columns need an evaluation set; bench only fills timing.
  out << metrics::format_table({{c.preset, rep}});
  out << "latency: mean " << rep.latency->mean_ms << " ms, p50 " << rep.latency->p50_ms << " ms, p95 "
      << rep.latency->p95_ms << " ms over " << rep.latency->measured << " frames\n";
  if (!o.out.empty()) {
    write_json_file(o.out, Json{{"preset", c.preset},
                                {"frame_size", c.rollout.camera.resolution},
                                {"latency", rep.latency->to_json()},
                                {"layers", rep.layers},
                                {"parameters", rep.parameters}});
  }
  return kExitOk;
}

tomo::Interpolation parse_interp(const std::string& s) {
  if (s == "linear") return tomo::Interpolation::kLinear;
  if (s == "nearest") return tomo::Interpolation::kNearest;
  throw InvalidInput("unknown interpolation '" + s + "'");
}

int cmd_radon(const Options& o, std::ostream& out) {
  const tomo::Image img = tomo::read_pgm(o.in);
  tomo::TomoConfig cfg;
  cfg.num_angles = o.angles;
  cfg.offset_count = o.offsets;
  cfg.interpolation = parse_interp(o.interp);
  cfg.output_size = std::max(img.width, img.height);
  cfg.validate();
  const tomo::Sinogram sino = tomo::radon(img, cfg);
  tomo::write_sinogram(o.out, sino);
  out << "radon: " << sino.num_angles() << " x " << sino.offset_count << " -> " << o.out << "\n";
  return kExitOk;
}

int cmd_reconstruct(const Options& o, std::ostream& out) {
  const tomo::Sinogram sino = tomo::read_sinogram(o.in);
  const int size = o.size > 0 ? o.size : sino.offset_count;
  tomo::Image img;
  if (o.filter == "ramp") img = tomo::fbp(sino, size);
  else if (o.filter == "none") img = tomo::normalize_minmax(tomo::backproject(sino, size));
  else throw InvalidInput("unknown filter '" + o.filter + "'");
  tomo::write_pgm(o.out, img);
  out << "reconstruct: " << size << " x " << size << " -> " << o.out << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Road-following drone navigation pipeline", "roadnav"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: available parallelism)")->check(CLI::NonNegativeNumber);

  Options o;
  auto config_opt = [&](CLI::App* s) { s->add_option("--config", o.config, "Run config JSON")->check(CLI::ExistingFile); };
  auto scenario = [&](CLI::App* s) {
    s->add_option("--world", o.world, "Map JSON from gen-world")->check(CLI::ExistingFile);
    s->add_option("--map-seed", o.map_seed, "Generate the map from this seed instead");
    s->add_option("--route-seed", o.route_seed, "Route planner seed");
    s->add_option("--seed", o.seed, "Episode seed");
  };

  CLI::App* gen = app.add_subcommand("gen-world", "Generate a road map");
  config_opt(gen);
  gen->add_option("--seed", o.seed, "Map seed");
  gen->add_option("--out", o.out, "Output map JSON")->required();

  CLI::App* demo = app.add_subcommand("demo", "Record oracle demonstrations into an episode directory");
  config_opt(demo);
  scenario(demo);
  demo->add_option("--frames", o.frames, "Frame budget");
  demo->add_option("--out", o.out, "Episode directory")->required();

  CLI::App* feat = app.add_subcommand("featurize", "Fill the feature cache for episodes");
  config_opt(feat);
  feat->add_option("--episodes", o.episodes, "Episode directories")->required()->check(CLI::ExistingDirectory);
  feat->add_option("--cache", o.cache, "Cache directory");

  CLI::App* train = app.add_subcommand("train", "Train a network on cached features");
  config_opt(train);
  train->add_option("--episodes", o.episodes, "Episode directories (overrides the config)")->check(CLI::ExistingDirectory);
  train->add_option("--run", o.run, "Run directory")->required();
  train->add_flag("--resume", o.resume, "Continue from the run's checkpoint");
  train->add_option("--stop-after", o.stop_after, "Stop once this many epochs are done");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate trained weights on a split");
  config_opt(eval);
  eval->add_option("--run", o.run, "Run directory")->required();
  eval->add_option("--weights", o.weights, "Weights file (default: <run>/weights.mavw)")->check(CLI::ExistingFile);
  eval->add_option("--episodes", o.episodes, "Episode directories (overrides the config)")->check(CLI::ExistingDirectory);
  eval->add_option("--split", o.split, "train, val or test");
  eval->add_option("--out", o.out, "Output directory (default: <run>/eval)");
  eval->add_flag("--assert", o.assert_, "Exit 3 when a threshold is missed");
  eval->add_option("--min-junction-f", o.min_f, "Junction F-measure threshold");
  eval->add_option("--min-accuracy", o.min_accuracy, "Junction accuracy threshold");
  eval->add_option("--min-agreement", o.min_agreement, "Action agreement threshold");
  eval->add_flag("--bench", o.bench, "Add featurize+forward latency to the report");
  eval->add_option("--warmup", o.warmup, "Benchmark warmup iterations");

  CLI::App* roll = app.add_subcommand("rollout", "Fly a route closed-loop");
  config_opt(roll);
  scenario(roll);
  roll->add_option("--weights", o.weights, "Trained weights")->check(CLI::ExistingFile);
  roll->add_flag("--oracle", o.oracle, "Fly the oracle instead of a network");
  roll->add_option("--max-frames", o.max_frames, "Frame budget");
  roll->add_option("--out", o.out, "Output directory")->required();
  roll->add_flag("--assert", o.assert_, "Exit 3 unless the route completes");

  CLI::App* bench = app.add_subcommand("bench", "Featurize+forward latency on rendered frames");
  config_opt(bench);
  bench->add_option("--weights", o.weights, "Weights (default: untrained)")->check(CLI::ExistingFile);
  bench->add_option("--preset", o.preset, "tiny or full");
  bench->add_option("--frames", o.frames, "Measured frames");
  bench->add_option("--warmup", o.warmup, "Warmup iterations");
  bench->add_option("--out", o.out, "Latency JSON");

  CLI::App* radon = app.add_subcommand("radon", "Sinogram of a PGM image");
  radon->add_option("--in", o.in, "Input PGM")->required()->check(CLI::ExistingFile);
  radon->add_option("--angles", o.angles, "Angles over [0, pi)");
  radon->add_option("--offsets", o.offsets, "Offset samples (0: image diagonal)");
  radon->add_option("--interp", o.interp, "linear or nearest");
  radon->add_option("--out", o.out, "Output .csv or .sino")->required();

  CLI::App* recon = app.add_subcommand("reconstruct", "Filtered back-projection of a sinogram");
  recon->add_option("--in", o.in, "Input .csv or .sino")->required()->check(CLI::ExistingFile);
  recon->add_option("--size", o.size, "Output side (default: offset count)");
  recon->add_option("--filter", o.filter, "ramp or none");
  recon->add_option("--out", o.out, "Output PGM")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }
  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (*gen) return cmd_gen_world(o, *gen, out);
    if (*demo) return cmd_demo(o, *demo, out);
    if (*feat) return cmd_featurize(o, out);
    if (*train) return cmd_train(o, *train, out);
    if (*eval) return cmd_eval(o, out, err);
    if (*roll) return cmd_rollout(o, *roll, out);
    if (*bench) return cmd_bench(o, *bench, out);
    if (*radon) return cmd_radon(o, out);
    if (*recon) return cmd_reconstruct(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const Json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace roadnav::cli
