#include "roadnav/dataio/feature_cache.h"

#include <cstring>

#include "roadnav/common/error.h"
#include "roadnav/common/json_util.h"

namespace roadnav::dataio {
namespace fs = std::filesystem;

namespace {

constexpr const char* kIndexFile = "index.json";

std::string encode_f32(const std::vector<float>& v) {
  static_assert(sizeof(float) == 4);
  std::string bytes(v.size() * 4, '\0');
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::uint32_t u;
    std::memcpy(&u, &v[i], 4);
    for (int b = 0; b < 4; ++b) bytes[i * 4 + b] = static_cast<char>((u >> (8 * b)) & 0xff);
  }
  return bytes;
}

std::vector<float> decode_f32(const std::string& bytes) {
  std::vector<float> v(bytes.size() / 4);
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::uint32_t u = 0;
    for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i * 4 + b])) << (8 * b);
    std::memcpy(&v[i], &u, 4);
  }
  return v;
}

}  // namespace

Digest frame_digest(const tomo::Image& frame) {
  Sha256 h;
  h.update_u32(static_cast<std::uint32_t>(frame.width));
  h.update_u32(static_cast<std::uint32_t>(frame.height));
  h.update_doubles(frame.data);
  return h.finish();
}

Digest feature_key(const Digest& frame, const Digest& config) {
  Sha256 h;
  h.update(std::span<const std::uint8_t>(frame));
  h.update(std::span<const std::uint8_t>(config));
  return h.finish();
}

FeatureCache::FeatureCache(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
  if (fs::exists(dir_ / kIndexFile)) {
    const Json j = read_json_file(dir_ / kIndexFile);
    for (const auto& [k, v] : j.items()) index_[k] = v.get<std::string>();
  }
}

std::optional<std::vector<float>> FeatureCache::lookup(const Digest& key) const {
  const std::string hex = to_hex(key);
  std::string want;
  {
    std::lock_guard lock(mu_);
    const auto it = index_.find(hex);
    if (it == index_.end()) return std::nullopt;
    want = it->second;
  }
  const fs::path blob = dir_ / (hex + ".f32");
  if (!fs::exists(blob)) throw StaleCache("cache: blob " + hex + " is missing");
  const std::string bytes = read_text_file(blob);
  if (to_hex(sha256(bytes)) != want || bytes.size() % 4 != 0) {
    throw StaleCache("cache: blob " + hex + " fails its digest");
  }
  return decode_f32(bytes);
}

void FeatureCache::store(const Digest& key, const std::vector<float>& values) {
  const std::string hex = to_hex(key);
  const std::string bytes = encode_f32(values);
  write_file_atomic(dir_ / (hex + ".f32"), bytes);
  {
    std::lock_guard lock(mu_);
    index_[hex] = to_hex(sha256(bytes));
  }
}

void FeatureCache::flush() const {
  Json j = Json::object();
  {
    std::lock_guard lock(mu_);
    for (const auto& [k, v] : index_) j[k] = v;
  }
  write_json_file(dir_ / kIndexFile, j);
}

std::vector<float> FeatureCache::features(const tomo::Image& frame, const tomo::TomoConfig& cfg) {
  const Digest key = feature_key(frame_digest(frame), cfg.digest());
  try {
    if (auto hit = lookup(key)) {
      ++stats_.hits;
      return *hit;
    }
    ++stats_.misses;
  } catch (const StaleCache&) {
    ++stats_.stale;
  }
  ++stats_.featurize_calls;
  const tomo::Image feat = tomo::featurize(frame, cfg);
  std::vector<float> values(feat.data.begin(), feat.data.end());
  store(key, values);
  return values;
}

std::vector<std::vector<float>> cache_features(const sim::EpisodeLog& episode,
                                               const tomo::TomoConfig& cfg, FeatureCache& cache) {
  cfg.validate();
  std::vector<std::vector<float>> out;
  out.reserve(episode.records.size());
  for (const sim::EpisodeRecord& rec : episode.records) out.push_back(cache.features(rec.image, cfg));
  cache.flush();
  return out;
}

}  // namespace roadnav::dataio
