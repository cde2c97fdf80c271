#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mcst/types.hpp"

namespace mcst {

// Linear map of [lo, hi] onto 0..255 with clamping, row-major.
std::vector<std::uint8_t> window_image(const Image& image, double lo, double hi);

// 8-bit grayscale PNG of the windowed image.
void write_png(const std::filesystem::path& path, const Image& image, double lo, double hi);

}  // namespace mcst
