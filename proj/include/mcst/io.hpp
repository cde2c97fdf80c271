#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "mcst/types.hpp"

namespace mcst {

// views x detectors measurements, view-major.
struct Sinogram {
  int views = 0;
  int detectors = 0;
  Vector data;
};

// Image file: "MCIMG1", u32 height, u32 width, row-major f32 pixels (all LE).
void write_image(const std::filesystem::path& path, const Image& image);
Image read_image(const std::filesystem::path& path);

// Sinogram ("MCSIN1") and weight ("MCWGT1") files share one layout:
// magic, u32 views, u32 detectors, view-major f32 values.
void write_sinogram(const std::filesystem::path& path, const Sinogram& sino);
Sinogram read_sinogram(const std::filesystem::path& path);
void write_weights(const std::filesystem::path& path, const Sinogram& weights);
Sinogram read_weights(const std::filesystem::path& path);

namespace le {

void put_u32(std::ostream& os, std::uint32_t v);
void put_f32(std::ostream& os, float v);
void put_f64(std::ostream& os, double v);
std::uint32_t get_u32(std::istream& is);
float get_f32(std::istream& is);
double get_f64(std::istream& is);
void put_magic(std::ostream& os, std::string_view magic);
// Throws FormatError when the next bytes are not `magic`.
void expect_magic(std::istream& is, std::string_view magic, const std::string& what);

}  // namespace le
}  // namespace mcst
