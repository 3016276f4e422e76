#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "roadnav/common/error.h"
#include "roadnav/common/json_util.h"
#include "roadnav/tomography/io.h"

namespace roadnav::tomo {

void write_sinogram_csv(std::ostream& out, const Sinogram& sino) {
  out << "angle_rad,offset_px,value\n";
  char line[128];
  for (int i = 0; i < sino.num_angles(); ++i) {
    for (int j = 0; j < sino.offset_count; ++j) {
      std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", sino.angles[i], sino.offset(j),
                    sino.at(i, j));
      out << line;
    }
  }
}

Sinogram read_sinogram_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "angle_rad,offset_px,value") {
    throw ParseError(0, "sinogram csv: missing header");
  }
  std::vector<double> angles;
  std::vector<double> offsets;
  std::vector<double> values;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    double a = 0, s = 0, v = 0;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &a, &s, &v) != 3) {
      throw ParseError(row, "sinogram csv: expected three numbers");
    }
    if (angles.empty() || angles.back() != a) angles.push_back(a);
    if (angles.size() == 1) offsets.push_back(s);
    values.push_back(v);
  }
  if (angles.empty() || offsets.size() < 2) throw ParseError(row, "sinogram csv: too few samples");
  if (values.size() != angles.size() * offsets.size()) {
    throw ParseError(row, "sinogram csv: ragged angle rows");
  }
  Sinogram sino(angles, static_cast<int>(offsets.size()), offsets[1] - offsets[0]);
  sino.data = std::move(values);
  return sino;
}

std::string encode_sinogram_bin(const Sinogram& sino) {
  std::string out(16 + sino.data.size() * sizeof(double), '\0');
  std::memcpy(out.data(), "SINO", 4);
  const std::uint32_t na = static_cast<std::uint32_t>(sino.num_angles());
  const std::uint32_t no = static_cast<std::uint32_t>(sino.offset_count);
  const float ds = static_cast<float>(sino.offset_spacing);
  std::memcpy(out.data() + 4, &na, 4);
  std::memcpy(out.data() + 8, &no, 4);
  std::memcpy(out.data() + 12, &ds, 4);
  std::memcpy(out.data() + 16, sino.data.data(), sino.data.size() * sizeof(double));
  return out;
}

Sinogram decode_sinogram_bin(const std::string& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), "SINO", 4) != 0) {
    throw CorruptFile("sinogram: bad magic");
  }
  std::uint32_t na = 0, no = 0;
  float ds = 0;
  std::memcpy(&na, bytes.data() + 4, 4);
  std::memcpy(&no, bytes.data() + 8, 4);
  std::memcpy(&ds, bytes.data() + 12, 4);
  const std::size_t n = static_cast<std::size_t>(na) * no;
  if (bytes.size() != 16 + n * sizeof(double)) throw CorruptFile("sinogram: size mismatch");
  Sinogram sino(uniform_angles(static_cast<int>(na)), static_cast<int>(no), ds);
  std::memcpy(sino.data.data(), bytes.data() + 16, n * sizeof(double));
  return sino;
}

void write_sinogram(const std::filesystem::path& path, const Sinogram& sino) {
  if (path.extension() == ".csv") {
    std::ostringstream ss;
    write_sinogram_csv(ss, sino);
    write_file_atomic(path, ss.str());
  } else {
    write_file_atomic(path, encode_sinogram_bin(sino));
  }
}

Sinogram read_sinogram(const std::filesystem::path& path) {
  const std::string bytes = read_text_file(path);
  if (path.extension() == ".csv") {
    std::istringstream ss(bytes);
    return read_sinogram_csv(ss);
  }
  return decode_sinogram_bin(bytes);
}

}  // namespace roadnav::tomo
