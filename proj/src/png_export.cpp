#include "mcst/png_export.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>

#include "mcst/errors.hpp"

namespace mcst {

std::vector<std::uint8_t> window_image(const Image& image, double lo, double hi) {
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) throw ConfigError("window: need finite lo < hi");
  std::vector<std::uint8_t> out(static_cast<std::size_t>(image.size()));
  for (Eigen::Index i = 0; i < image.rows(); ++i) {
    for (Eigen::Index j = 0; j < image.cols(); ++j) {
      double v = std::nearbyint((image(i, j) - lo) * 255.0 / (hi - lo));
      if (!(v > 0.0)) v = 0.0;
      if (v > 255.0) v = 255.0;
      out[static_cast<std::size_t>(i * image.cols() + j)] = static_cast<std::uint8_t>(v);
    }
  }
  return out;
}

void write_png(const std::filesystem::path& path, const Image& image, double lo, double hi) {
  const auto pixels = window_image(image, lo, hi);
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png: cannot create writer");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png: cannot create info");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("png: write failed for " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.cols()), static_cast<png_uint_32>(image.rows()), 8,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (Eigen::Index r = 0; r < image.rows(); ++r) {
    png_write_row(png, const_cast<png_bytep>(pixels.data() + r * image.cols()));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace mcst
