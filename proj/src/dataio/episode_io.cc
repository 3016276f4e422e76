#include "roadnav/dataio/episode_io.h"

#include <cstdio>
#include <fstream>

#include "roadnav/common/error.h"
#include "roadnav/tomography/io.h"

namespace roadnav::dataio {
namespace fs = std::filesystem;

std::string frame_file_name(int frame_id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%06d.pgm", frame_id);
  return buf;
}

Json record_to_json(const sim::EpisodeRecord& rec, const std::string& frame_file) {
  return Json{{"frame_id", rec.frame_id},
              {"frame", frame_file},
              {"targets", rec.target},
              {"pose", rec.pose.to_json()},
              {"t", rec.timestamp}};
}

void save_episode(const sim::EpisodeLog& log, const fs::path& dir, const Json& extra_meta) {
  log.validate();
  fs::create_directories(dir);
  std::string lines;
  for (const sim::EpisodeRecord& rec : log.records) {
    const std::string name = frame_file_name(rec.frame_id);
    write_file_atomic(dir / name, tomo::encode_pgm(rec.image));
    lines += record_to_json(rec, name).dump() + "\n";
  }
  Json meta = extra_meta;
  meta["episode_id"] = log.episode_id;
  meta["map_seed"] = log.map_seed;
  meta["frames"] = log.records.size();
  write_json_file(dir / kMetaFile, meta);
  write_file_atomic(dir / kLogFile, lines);
}

Json load_episode_meta(const fs::path& dir) {
  if (!fs::exists(dir / kMetaFile)) return Json::object();
  return read_json_file(dir / kMetaFile);
}

namespace {

sim::EpisodeRecord parse_record(const Json& j, std::size_t index, const fs::path& dir) {
  if (!j.is_object()) throw ParseError(index, "record is not a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key != "frame_id" && key != "frame" && key != "targets" && key != "pose" && key != "t") {
      throw ParseError(index, "unknown key '" + key + "'");
    }
  }
  for (const char* key : {"frame_id", "frame", "targets", "pose", "t"}) {
    if (!j.contains(key)) throw ParseError(index, std::string("missing key '") + key + "'");
  }
  sim::EpisodeRecord rec;
  try {
    rec.frame_id = j.at("frame_id").get<int>();
    const Json& targets = j.at("targets");
    if (!targets.is_array() || targets.size() != nn::kNumHeads) {
      throw ParseError(index, "targets must hold exactly 5 values");
    }
    for (int h = 0; h < nn::kNumHeads; ++h) {
      const double v = targets.at(h).get<double>();
      if (v != 0.0 && v != 1.0) throw ParseError(index, "targets must be 0 or 1");
      rec.target[h] = v;
    }
    rec.pose = sim::DronePose::from_json(j.at("pose"));
    rec.timestamp = j.at("t").get<double>();
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(index, std::string("schema: ") + e.what());
  }
  const std::string name = j.at("frame").is_string() ? j.at("frame").get<std::string>() : "";
  if (name.empty() || fs::path(name).has_parent_path()) throw ParseError(index, "bad frame file name");
  const fs::path frame = dir / name;
  if (!fs::exists(frame)) throw ParseError(index, "missing frame file " + name);
  try {
    rec.image = tomo::read_pgm(frame);
  } catch (const Error& e) {
    throw ParseError(index, std::string("frame ") + name + ": " + e.what());
  }
  return rec;
}

}  // namespace

sim::EpisodeLog load_episode(const fs::path& dir) {
  if (!fs::exists(dir / kLogFile)) throw InvalidInput("episode: no log.jsonl in " + dir.string());
  const Json meta = load_episode_meta(dir);
  sim::EpisodeLog log;
  log.episode_id = meta.value("episode_id", dir.filename().string());
  log.map_seed = meta.value("map_seed", std::uint64_t{0});

  std::ifstream in(dir / kLogFile);
  std::string line;
  std::size_t index = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw ParseError(index, std::string("malformed JSON: ") + e.what());
    }
    sim::EpisodeRecord rec = parse_record(j, index, dir);
    if (!log.records.empty()) {
      if (!(rec.timestamp > log.records.back().timestamp)) {
        throw TimestampRegression(index, "timestamp does not increase");
      }
      if (rec.frame_id <= log.records.back().frame_id) throw ParseError(index, "frame_id does not increase");
    }
    log.records.push_back(std::move(rec));
    ++index;
  }
  return log;
}

}  // namespace roadnav::dataio
