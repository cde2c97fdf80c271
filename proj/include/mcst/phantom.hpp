#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcst/types.hpp"

namespace mcst::ct {

// Ellipse in physical coordinates (mm, origin at the image center, y up).
struct Ellipse {
  double cx = 0.0;
  double cy = 0.0;
  double semi_x = 1.0;
  double semi_y = 1.0;
  double angle_deg = 0.0;
  double value = 0.0;
};

// Sum of ellipse indicators sampled at pixel centers.
Image rasterize(const std::vector<Ellipse>& ellipses, int height, int width, double pixel_mm);

// Modified Shepp-Logan head in HU-like units (brain ~1000, skull 1800, air 0),
// scaled to the field of view.
std::vector<Ellipse> shepp_logan(int height, int width, double pixel_mm);

// Centered disk of `radius_mm` (default: 0.8 of the half field of view).
std::vector<Ellipse> disk(int height, int width, double pixel_mm, double value = 1000.0,
                          double radius_mm = -1.0);

// Randomized head-like ellipse phantom used for synthetic training slices.
std::vector<Ellipse> random_head(int height, int width, double pixel_mm, std::uint64_t seed);

// "cx,cy,sx,sy,angle_deg,value" per line (or ';'-separated); '#' comments.
std::vector<Ellipse> parse_ellipses(const std::string& text);

// Dispatch by name: "shepp-logan", "disk", "head" (random_head with seed),
// "ellipses" (uses `ellipse_text`). Throws ConfigError for unknown names.
Image phantom(const std::string& name, int height, int width, double pixel_mm,
              std::uint64_t seed = 0, const std::string& ellipse_text = {});

}  // namespace mcst::ct
