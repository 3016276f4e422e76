#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace roadnav {

using Digest = std::array<std::uint8_t, 32>;

// SHA-256 of a byte buffer.
Digest sha256(std::span<const std::uint8_t> bytes);
Digest sha256(std::string_view text);

// SHA-256 over the little-endian byte image of a double array.
Digest sha256_doubles(std::span<const double> values);

std::string to_hex(const Digest& d);
Digest digest_from_hex(std::string_view hex);

// Incremental hasher for digests that combine several fields.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(std::span<const std::uint8_t> bytes);
  Sha256& update(std::string_view text);
  Sha256& update_u32(std::uint32_t v);
  Sha256& update_doubles(std::span<const double> values);
  Digest finish();

 private:
  void* ctx_;
};

}  // namespace roadnav
