#pragma once

#include <filesystem>
#include <string>

#include "roadnav/nn/network.h"

namespace roadnav::nn {

// "MAVW" | u32 version (1) | 32-byte spec digest | per parameter slot in spec
// order: weights then bias (batchnorm adds running mean and variance), raw
// f64. Everything little-endian.
inline constexpr std::uint32_t kWeightsVersion = 1;

std::string encode_weights(const Network& net);

// IncompatibleWeights when the digest does not match `spec`; CorruptFile on
// bad magic/version or when the byte count differs from what `spec` implies.
Network decode_weights(const std::string& bytes, const NetworkSpec& spec);

void save_weights(const Network& net, const std::filesystem::path& path);
Network load_weights(const std::filesystem::path& path, const NetworkSpec& spec);

}  // namespace roadnav::nn
