#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "roadnav/common/digest.h"
#include "roadnav/simworld/episode.h"
#include "roadnav/tomography/tomography.h"

namespace roadnav::dataio {

// Content address of a feature: SHA-256 over the frame digest and the
// featurization config digest.
Digest frame_digest(const tomo::Image& frame);
Digest feature_key(const Digest& frame, const Digest& config);

struct CacheStats {
  int hits = 0;
  int misses = 0;
  int stale = 0;
  int featurize_calls = 0;
};

// Directory of <key>.f32 blobs (little-endian float32, row-major) plus
// index.json mapping each key to the SHA-256 of its blob. Blobs and the index
// are written by temp-file rename.
class FeatureCache {
 public:
  explicit FeatureCache(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  const CacheStats& stats() const { return stats_; }
  void reset_stats() { stats_ = {}; }

  // Cached feature or nullopt on a miss. StaleCache when the blob is missing,
  // truncated or fails its digest.
  std::optional<std::vector<float>> lookup(const Digest& key) const;

  // Lookup, falling back to featurize on a miss or a stale entry, which is
  // then overwritten. New entries reach index.json on flush().
  std::vector<float> features(const tomo::Image& frame, const tomo::TomoConfig& cfg);

  // Writes the blob; the index entry is in memory until flush().
  void store(const Digest& key, const std::vector<float>& values);
  void flush() const;

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::string> index_;  // key hex -> blob digest hex
  CacheStats stats_;
  mutable std::mutex mu_;
};

// One feature vector per frame, in record order. Flushes the index.
std::vector<std::vector<float>> cache_features(const sim::EpisodeLog& episode,
                                               const tomo::TomoConfig& cfg, FeatureCache& cache);

}  // namespace roadnav::dataio
