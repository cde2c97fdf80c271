#include "mcst/phantom.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "mcst/errors.hpp"

namespace mcst::ct {

Image rasterize(const std::vector<Ellipse>& ellipses, int height, int width, double pixel_mm) {
  if (height < 1 || width < 1 || !(pixel_mm > 0)) throw InvalidGeometry("phantom: invalid dimensions");
  Image img = Image::Zero(height, width);
  for (const auto& e : ellipses) {
    const double th = e.angle_deg * std::numbers::pi / 180.0;
    const double c = std::cos(th), s = std::sin(th);
    for (int r = 0; r < height; ++r) {
      const double y = ((height - 1) / 2.0 - r) * pixel_mm - e.cy;
      for (int col = 0; col < width; ++col) {
        const double x = (col - (width - 1) / 2.0) * pixel_mm - e.cx;
        const double u = (x * c + y * s) / e.semi_x;
        const double v = (-x * s + y * c) / e.semi_y;
        if (u * u + v * v <= 1.0) img(r, col) += e.value;
      }
    }
  }
  return img;
}

std::vector<Ellipse> shepp_logan(int height, int width, double pixel_mm) {
  // Normalized geometry of the modified (Toft) Shepp-Logan phantom with
  // intensities re-based so that brain tissue sits at 1000.
  struct Row {
    double value, a, b, x0, y0, phi;
  };
  static constexpr Row rows[] = {
      {1800, 0.69, 0.92, 0.0, 0.0, 0},        {-800, 0.6624, 0.8740, 0.0, -0.0184, 0},
      {-200, 0.1100, 0.3100, 0.22, 0.0, -18}, {-200, 0.1600, 0.4100, -0.22, 0.0, 18},
      {100, 0.2100, 0.2500, 0.0, 0.35, 0},    {100, 0.0460, 0.0460, 0.0, 0.1, 0},
      {100, 0.0460, 0.0460, 0.0, -0.1, 0},    {100, 0.0460, 0.0230, -0.08, -0.605, 0},
      {100, 0.0230, 0.0230, 0.0, -0.606, 0},  {100, 0.0230, 0.0460, 0.06, -0.605, 0},
  };
  const double half_x = width * pixel_mm / 2.0;
  const double half_y = height * pixel_mm / 2.0;
  std::vector<Ellipse> out;
  for (const auto& r : rows) {
    out.push_back({r.x0 * half_x, r.y0 * half_y, r.a * half_x, r.b * half_y, r.phi, r.value});
  }
  return out;
}

std::vector<Ellipse> disk(int height, int width, double pixel_mm, double value, double radius_mm) {
  const double half = std::min(height, width) * pixel_mm / 2.0;
  const double radius = radius_mm > 0 ? radius_mm : 0.8 * half;
  return {{0.0, 0.0, radius, radius, 0.0, value}};
}

std::vector<Ellipse> random_head(int height, int width, double pixel_mm, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto between = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  const double hx = width * pixel_mm / 2.0;
  const double hy = height * pixel_mm / 2.0;

  std::vector<Ellipse> out;
  const double ax = between(0.6, 0.8) * hx;
  const double ay = between(0.75, 0.92) * hy;
  const double tilt = between(-10, 10);
  const double skull = between(1500, 1900);
  const double thick = between(0.03, 0.06);
  out.push_back({0, 0, ax, ay, tilt, skull});
  out.push_back({0, 0, ax * (1 - thick), ay * (1 - thick), tilt, 1000 - skull + between(-40, 40)});
  const int features = 5 + static_cast<int>(unit(rng) * 8);
  for (int f = 0; f < features; ++f) {
    const double rad = std::sqrt(unit(rng)) * 0.6;
    const double ang = between(0, 2 * std::numbers::pi);
    const double size = between(0.03, 0.25);
    const double values[] = {-200, -120, -60, 60, 100, 150, 250};
    out.push_back({rad * ax * std::cos(ang), rad * ay * std::sin(ang), size * ax * between(0.4, 1.0),
                   size * ay * between(0.4, 1.0), between(-90, 90),
                   values[static_cast<int>(unit(rng) * 7) % 7]});
  }
  return out;
}

std::vector<Ellipse> parse_ellipses(const std::string& text) {
  std::vector<Ellipse> out;
  std::string normalized = text;
  for (auto& ch : normalized) {
    if (ch == ';') ch = '\n';
  }
  std::istringstream lines(normalized);
  std::string line;
  while (std::getline(lines, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (auto& ch : line) {
      if (ch == ',') ch = ' ';
    }
    std::istringstream fields(line);
    Ellipse e;
    if (!(fields >> e.cx)) continue;
    if (!(fields >> e.cy >> e.semi_x >> e.semi_y >> e.angle_deg >> e.value) || !(e.semi_x > 0) ||
        !(e.semi_y > 0)) {
      throw ConfigError("ellipse spec: expected 'cx,cy,sx,sy,angle_deg,value' with positive axes");
    }
    out.push_back(e);
  }
  return out;
}

Image phantom(const std::string& name, int height, int width, double pixel_mm, std::uint64_t seed,
              const std::string& ellipse_text) {
  if (name == "shepp-logan") return rasterize(shepp_logan(height, width, pixel_mm), height, width, pixel_mm);
  if (name == "disk") return rasterize(disk(height, width, pixel_mm), height, width, pixel_mm);
  if (name == "head") return rasterize(random_head(height, width, pixel_mm, seed), height, width, pixel_mm);
  if (name == "ellipses") return rasterize(parse_ellipses(ellipse_text), height, width, pixel_mm);
  throw ConfigError("unknown phantom '" + name + "' (expected shepp-logan, disk, head, ellipses)");
}

}  // namespace mcst::ct
