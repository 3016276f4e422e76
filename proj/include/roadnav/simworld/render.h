#pragma once

#include <string_view>

#include "roadnav/common/json_util.h"
#include "roadnav/simworld/pose.h"
#include "roadnav/simworld/road_map.h"
#include "roadnav/tomography/image.h"

namespace roadnav::sim {

enum class ShadowMode { kOff, kSoft, kSharp };
std::string_view to_string(ShadowMode m);
ShadowMode shadow_mode_from_string(std::string_view s);

inline constexpr double kRoadIntensity = 0.2;
inline constexpr double kBackgroundIntensity = 0.8;
inline constexpr double kShadowFactor = 0.75;

// Top-down orthographic camera. Image up is the drone heading; the footprint
// center sits forward_offset meters ahead of the drone.
struct CameraModel {
  double footprint = 8.0;  // meters per side
  int resolution = 100;
  double noise_sigma = 0.05;
  ShadowMode shadow_mode = ShadowMode::kOff;
  double forward_offset = 0.0;

  double meters_per_pixel() const { return footprint / resolution; }
  void validate() const;
  Json to_json() const;
  static CameraModel from_json(const Json& j);
};

// World point under the center of pixel (row, col).
Vec2 pixel_to_world(const DronePose& pose, const CameraModel& cam, double row, double col);

// Road coverage from 2x2 supersampling; road pixels 0.2, background 0.8 plus
// world-anchored speckle (clamped to 3 sigma), then shadow bands, then clamped
// to [0, 1]. Pure in (map, pose, camera). OutOfWorld when the pose is outside.
tomo::Image render_view(const RoadMap& map, const DronePose& pose, const CameraModel& cam);

}  // namespace roadnav::sim
