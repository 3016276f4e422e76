#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"
#include "roadnav/common/digest.h"

namespace roadnav {

using Json = nlohmann::json;

// Canonical serialization: keys sorted (nlohmann objects are ordered maps),
// no whitespace, shortest round-trip doubles.
std::string canonical_dump(const Json& j);
Digest json_digest(const Json& j);

std::string read_text_file(const std::filesystem::path& path);
Json read_json_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it into place, so readers
// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
void write_json_file(const std::filesystem::path& path, const Json& j);

// Throws InvalidInput naming the first key of `obj` not in `allowed`.
void reject_unknown_keys(const Json& obj, std::initializer_list<std::string_view> allowed,
                         std::string_view context);

}  // namespace roadnav
