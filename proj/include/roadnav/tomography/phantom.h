#pragma once

#include "roadnav/tomography/image.h"

namespace roadnav::tomo {

// Modified (high-contrast) Shepp-Logan head phantom on a size x size grid,
// pixel values are area coverages estimated with `supersample`^2 points.
// Raw intensities lie in [0, 1].
Image shepp_logan(int size, int supersample = 4);

// Disc of the given radius (pixels) centered at the grid center, intensity 1,
// antialiased by supersampling.
Image disc(int size, double radius, int supersample = 8);

}  // namespace roadnav::tomo
