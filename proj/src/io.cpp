#include "mcst/io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <tuple>

#include "mcst/errors.hpp"

namespace mcst {
namespace le {

namespace {

template <typename T>
void put_bytes(std::ostream& os, T bits) {
  std::array<char, sizeof(T)> buf{};
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
  }
  os.write(buf.data(), buf.size());
}

template <typename T>
T get_bytes(std::istream& is) {
  std::array<unsigned char, sizeof(T)> buf{};
  if (!is.read(reinterpret_cast<char*>(buf.data()), buf.size())) {
    throw FormatError("unexpected end of file");
  }
  T bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<T>(buf[i]) << (8 * i);
  return bits;
}

}  // namespace

void put_u32(std::ostream& os, std::uint32_t v) { put_bytes(os, v); }
void put_f32(std::ostream& os, float v) { put_bytes(os, std::bit_cast<std::uint32_t>(v)); }
void put_f64(std::ostream& os, double v) { put_bytes(os, std::bit_cast<std::uint64_t>(v)); }
std::uint32_t get_u32(std::istream& is) { return get_bytes<std::uint32_t>(is); }
float get_f32(std::istream& is) { return std::bit_cast<float>(get_bytes<std::uint32_t>(is)); }
double get_f64(std::istream& is) { return std::bit_cast<double>(get_bytes<std::uint64_t>(is)); }

void put_magic(std::ostream& os, std::string_view magic) {
  os.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

void expect_magic(std::istream& is, std::string_view magic, const std::string& what) {
  std::string buf(magic.size(), '\0');
  if (!is.read(buf.data(), static_cast<std::streamsize>(buf.size())) || buf != magic) {
    throw FormatError(what + ": bad magic, expected \"" + std::string(magic) + "\"");
  }
}

}  // namespace le

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return is;
}

void finish(std::ofstream& os, const std::filesystem::path& path) {
  os.flush();
  if (!os) throw IoError("write failed: " + path.string());
}

void write_table(const std::filesystem::path& path, std::string_view magic, std::uint32_t rows,
                 std::uint32_t cols, const double* values) {
  auto os = open_out(path);
  le::put_magic(os, magic);
  le::put_u32(os, rows);
  le::put_u32(os, cols);
  const std::size_t n = std::size_t{rows} * cols;
  for (std::size_t i = 0; i < n; ++i) le::put_f32(os, static_cast<float>(values[i]));
  finish(os, path);
}

// Returns (rows, cols, values) of a table file.
std::tuple<std::uint32_t, std::uint32_t, Vector> read_table(const std::filesystem::path& path,
                                                            std::string_view magic) {
  auto is = open_in(path);
  le::expect_magic(is, magic, path.string());
  const auto rows = le::get_u32(is);
  const auto cols = le::get_u32(is);
  if (rows == 0 || cols == 0 || std::uint64_t{rows} * cols > (std::uint64_t{1} << 32)) {
    throw FormatError(path.string() + ": implausible dimensions");
  }
  Vector values(static_cast<Eigen::Index>(rows) * cols);
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    values(i) = le::get_f32(is);
    if (!std::isfinite(values(i))) throw FormatError(path.string() + ": non-finite value");
  }
  if (is.peek() != std::char_traits<char>::eof()) throw FormatError(path.string() + ": trailing bytes");
  return {rows, cols, std::move(values)};
}

}  // namespace

void write_image(const std::filesystem::path& path, const Image& image) {
  write_table(path, "MCIMG1", static_cast<std::uint32_t>(image.rows()),
              static_cast<std::uint32_t>(image.cols()), image.data());
}

Image read_image(const std::filesystem::path& path) {
  auto [rows, cols, values] = read_table(path, "MCIMG1");
  return as_image(values, static_cast<int>(rows), static_cast<int>(cols));
}

void write_sinogram(const std::filesystem::path& path, const Sinogram& sino) {
  write_table(path, "MCSIN1", sino.views, sino.detectors, sino.data.data());
}

Sinogram read_sinogram(const std::filesystem::path& path) {
  auto [rows, cols, values] = read_table(path, "MCSIN1");
  return {static_cast<int>(rows), static_cast<int>(cols), std::move(values)};
}

void write_weights(const std::filesystem::path& path, const Sinogram& weights) {
  write_table(path, "MCWGT1", weights.views, weights.detectors, weights.data.data());
}

Sinogram read_weights(const std::filesystem::path& path) {
  auto [rows, cols, values] = read_table(path, "MCWGT1");
  return {static_cast<int>(rows), static_cast<int>(cols), std::move(values)};
}

}  // namespace mcst
