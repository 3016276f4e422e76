#include <algorithm>
#include <cctype>
#include <cmath>

#include "roadnav/common/error.h"
#include "roadnav/common/json_util.h"
#include "roadnav/tomography/io.h"

namespace roadnav::tomo {

std::string encode_pgm(const Image& img) {
  if (img.empty()) throw InvalidInput("pgm: empty image");
  std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.reserve(out.size() + img.size());
  for (double v : img.data) {
    const double c = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(c * 255.0))));
  }
  return out;
}

namespace {

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string next_token(const std::string& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  return bytes.substr(start, pos - start);
}

int parse_positive(const std::string& tok, const char* what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size() || v <= 0) throw InvalidInput("");
    return v;
  } catch (const std::exception&) {
    throw CorruptFile(std::string("pgm: bad ") + what + " '" + tok + "'");
  }
}

}  // namespace

Image decode_pgm(const std::string& bytes) {
  std::size_t pos = 0;
  if (next_token(bytes, pos) != "P5") throw CorruptFile("pgm: missing P5 magic");
  const int w = parse_positive(next_token(bytes, pos), "width");
  const int h = parse_positive(next_token(bytes, pos), "height");
  const int maxval = parse_positive(next_token(bytes, pos), "maxval");
  if (maxval > 255) throw CorruptFile("pgm: only 8-bit maxval is supported");
  ++pos;  // single whitespace byte before the raster
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (bytes.size() < pos + n) throw CorruptFile("pgm: truncated raster");
  Image img(w, h);
  for (std::size_t i = 0; i < n; ++i) {
    img.data[i] = static_cast<unsigned char>(bytes[pos + i]) / static_cast<double>(maxval);
  }
  return img;
}

void write_pgm(const std::filesystem::path& path, const Image& img) {
  write_file_atomic(path, encode_pgm(img));
}

Image read_pgm(const std::filesystem::path& path) { return decode_pgm(read_text_file(path)); }

}  // namespace roadnav::tomo
