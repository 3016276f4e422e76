#pragma once

#include <filesystem>
#include <string>

#include "roadnav/common/json_util.h"
#include "roadnav/simworld/episode.h"

namespace roadnav::dataio {

inline constexpr const char* kLogFile = "log.jsonl";
inline constexpr const char* kMetaFile = "meta.json";

// One log.jsonl line:
// {"frame_id":N,"frame":"frame_000000.pgm","targets":[5 numbers],
//  "pose":{"x":..,"y":..,"heading":..,"altitude":2.5},"t":seconds}
Json record_to_json(const sim::EpisodeRecord& rec, const std::string& frame_file);

std::string frame_file_name(int frame_id);

// Writes frames, log.jsonl and meta.json (episode id, map seed, optional
// extra fields such as the route) into dir, creating it when needed.
void save_episode(const sim::EpisodeLog& log, const std::filesystem::path& dir,
                  const Json& extra_meta = Json::object());

// ParseError naming the record index for a malformed line, a schema
// violation or a missing frame; TimestampRegression for a non-increasing t.
sim::EpisodeLog load_episode(const std::filesystem::path& dir);

Json load_episode_meta(const std::filesystem::path& dir);

}  // namespace roadnav::dataio
