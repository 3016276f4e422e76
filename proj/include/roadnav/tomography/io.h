#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "roadnav/tomography/image.h"
#include "roadnav/tomography/tomography.h"

namespace roadnav::tomo {

// Binary PGM (P5, maxval 255). Samples are quantized as round(clamp(v)*255).
std::string encode_pgm(const Image& img);
Image decode_pgm(const std::string& bytes);
void write_pgm(const std::filesystem::path& path, const Image& img);
Image read_pgm(const std::filesystem::path& path);

// CSV with header `angle_rad,offset_px,value`, one row per sample, angle-major.
void write_sinogram_csv(std::ostream& out, const Sinogram& sino);
Sinogram read_sinogram_csv(std::istream& in);

// "SINO" | u32 angle count | u32 offset count | f32 spacing | f64 data, all
// little-endian. Angles are implied: uniform over [0, pi).
std::string encode_sinogram_bin(const Sinogram& sino);
Sinogram decode_sinogram_bin(const std::string& bytes);

void write_sinogram(const std::filesystem::path& path, const Sinogram& sino);  // by extension
Sinogram read_sinogram(const std::filesystem::path& path);

}  // namespace roadnav::tomo
