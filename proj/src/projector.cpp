#include "mcst/projector.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mcst/errors.hpp"

namespace mcst::ct {

void ScanGeometry::validate() const {
  if (height < 1 || width < 1 || views < 1 || detectors < 1) {
    throw InvalidGeometry("scan geometry: counts must be positive");
  }
  if (!(pixel_mm > 0) || !(detector_mm > 0) || !(attenuation_scale > 0)) {
    throw InvalidGeometry("scan geometry: spacings and attenuation scale must be positive");
  }
}

double ScanGeometry::angle(int view) const { return std::numbers::pi * view / views; }

double ScanGeometry::detector_offset(int detector) const {
  return (detector - (detectors - 1) / 2.0) * detector_mm;
}

namespace {

std::vector<RayEntry> trace_line(const ScanGeometry& geom, double theta, double t) {
  const double ox = t * std::cos(theta), oy = t * std::sin(theta);
  const double dx = -std::sin(theta), dy = std::cos(theta);
  const double d = geom.pixel_mm;
  const double xmin = -geom.width * d / 2.0, xmax = -xmin;
  const double ymin = -geom.height * d / 2.0, ymax = -ymin;
  constexpr double kEps = 1e-12;

  double s_lo = -INFINITY, s_hi = INFINITY;
  auto clip = [&](double o, double dir, double lo, double hi) {
    if (std::abs(dir) < kEps) {
      if (o <= lo || o >= hi) s_lo = INFINITY;
      return;
    }
    double a = (lo - o) / dir, b = (hi - o) / dir;
    if (a > b) std::swap(a, b);
    s_lo = std::max(s_lo, a);
    s_hi = std::min(s_hi, b);
  };
  clip(ox, dx, xmin, xmax);
  clip(oy, dy, ymin, ymax);
  if (!(s_hi > s_lo)) return {};

  std::vector<double> xs, ys;
  auto planes = [&](double o, double dir, double lo, int count, std::vector<double>& out) {
    if (std::abs(dir) < kEps) return;
    out.reserve(count + 1);
    for (int i = 0; i <= count; ++i) {
      const double s = (lo + i * d - o) / dir;
      if (s > s_lo && s < s_hi) out.push_back(s);
    }
    if (dir < 0) std::reverse(out.begin(), out.end());
  };
  planes(ox, dx, xmin, geom.width, xs);
  planes(oy, dy, ymin, geom.height, ys);

  std::vector<double> cuts;
  cuts.reserve(xs.size() + ys.size() + 2);
  cuts.push_back(s_lo);
  std::merge(xs.begin(), xs.end(), ys.begin(), ys.end(), std::back_inserter(cuts));
  cuts.push_back(s_hi);

  std::vector<RayEntry> out;
  out.reserve(cuts.size());
  for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
    const double len = cuts[j + 1] - cuts[j];
    if (len <= 1e-10 * d) continue;
    const double mid = 0.5 * (cuts[j] + cuts[j + 1]);
    const int c = std::clamp(static_cast<int>(std::floor((ox + mid * dx - xmin) / d)), 0, geom.width - 1);
    const int r = std::clamp(static_cast<int>(std::floor((ymax - (oy + mid * dy)) / d)), 0, geom.height - 1);
    out.push_back({static_cast<std::int32_t>(r * geom.width + c), len * geom.attenuation_scale});
  }
  return out;
}

// True when an axis-parallel ray runs exactly along a pixel boundary.
bool on_grid_line(const ScanGeometry& geom, double theta, double t) {
  const double c = std::cos(theta), s = std::sin(theta);
  double coord, half;
  if (std::abs(s) < 1e-12) {
    coord = t * c;
    half = geom.width / 2.0;
  } else if (std::abs(c) < 1e-12) {
    coord = t * s;
    half = geom.height / 2.0;
  } else {
    return false;
  }
  const double u = coord / geom.pixel_mm + half;
  return std::abs(u - std::round(u)) < 1e-9;
}

}  // namespace

std::vector<RayEntry> trace_ray(const ScanGeometry& geom, int view, int detector) {
  const double theta = geom.angle(view);
  const double t = geom.detector_offset(detector);
  if (!on_grid_line(geom, theta, t)) return trace_line(geom, theta, t);
  // The ray is shared equally by the pixels on both sides of the boundary.
  const double shift = 1e-6 * geom.pixel_mm;
  auto out = trace_line(geom, theta, t - shift);
  const auto other = trace_line(geom, theta, t + shift);
  out.insert(out.end(), other.begin(), other.end());
  for (auto& e : out) e.weight *= 0.5;
  return out;
}

ParallelBeamProjector::ParallelBeamProjector(const ScanGeometry& geom, std::size_t cache_bytes)
    : geom_(geom) {
  geom_.validate();
  const double per_ray = 1.5 * (geom_.height + geom_.width);
  const double estimate = 2.0 * per_ray * geom_.rays() * (sizeof(double) + sizeof(std::int32_t));
  if (estimate > static_cast<double>(cache_bytes)) return;

  std::vector<std::vector<RayEntry>> per_view(geom_.views);
#pragma omp parallel for schedule(dynamic)
  for (int v = 0; v < geom_.views; ++v) {
    for (int b = 0; b < geom_.detectors; ++b) {
      auto ray = trace_ray(geom_, v, b);
      per_view[v].insert(per_view[v].end(), ray.begin(), ray.end());
      per_view[v].push_back({-1, 0.0});  // ray terminator
    }
  }

  row_ptr_.assign(geom_.rays() + 1, 0);
  std::size_t nnz = 0;
  for (const auto& pv : per_view) nnz += pv.size();
  col_idx_.reserve(nnz);
  values_.reserve(nnz);
  int ray = 0;
  for (auto& pv : per_view) {
    for (const auto& e : pv) {
      if (e.pixel < 0) {
        row_ptr_[++ray] = static_cast<std::int64_t>(col_idx_.size());
        continue;
      }
      col_idx_.push_back(e.pixel);
      values_.push_back(e.weight);
    }
    std::vector<RayEntry>().swap(pv);
  }

  // Transpose by counting sort; entries of a pixel stay in ray order.
  col_ptr_.assign(geom_.pixels() + 1, 0);
  for (auto c : col_idx_) ++col_ptr_[c + 1];
  for (int p = 0; p < geom_.pixels(); ++p) col_ptr_[p + 1] += col_ptr_[p];
  row_idx_.resize(col_idx_.size());
  values_t_.resize(col_idx_.size());
  std::vector<std::int64_t> next(col_ptr_.begin(), col_ptr_.end() - 1);
  for (int r = 0; r < geom_.rays(); ++r) {
    for (auto j = row_ptr_[r]; j < row_ptr_[r + 1]; ++j) {
      const auto slot = next[col_idx_[j]]++;
      row_idx_[slot] = r;
      values_t_[slot] = values_[j];
    }
  }
}

Vector ParallelBeamProjector::forward(const Vector& x) const {
  if (x.size() != cols()) throw InvalidGeometry("forward projection: image size mismatch");
  Vector y(rows());
  if (cached()) {
#pragma omp parallel for schedule(static)
    for (Eigen::Index r = 0; r < rows(); ++r) {
      double acc = 0.0;
      for (auto j = row_ptr_[r]; j < row_ptr_[r + 1]; ++j) acc += values_[j] * x(col_idx_[j]);
      y(r) = acc;
    }
    return y;
  }
#pragma omp parallel for schedule(dynamic)
  for (int v = 0; v < geom_.views; ++v) {
    for (int b = 0; b < geom_.detectors; ++b) {
      double acc = 0.0;
      for (const auto& e : trace_ray(geom_, v, b)) acc += e.weight * x(e.pixel);
      y(v * geom_.detectors + b) = acc;
    }
  }
  return y;
}

Vector ParallelBeamProjector::adjoint(const Vector& y) const {
  if (y.size() != rows()) throw InvalidGeometry("back projection: sinogram size mismatch");
  Vector x(cols());
  if (cached()) {
#pragma omp parallel for schedule(static)
    for (Eigen::Index p = 0; p < cols(); ++p) {
      double acc = 0.0;
      for (auto j = col_ptr_[p]; j < col_ptr_[p + 1]; ++j) acc += values_t_[j] * y(row_idx_[j]);
      x(p) = acc;
    }
    return x;
  }
  // Fixed view blocks with private accumulators, combined in block order.
  constexpr int kBlocks = 16;
  std::vector<Vector> partial(kBlocks, Vector::Zero(cols()));
#pragma omp parallel for schedule(dynamic)
  for (int blk = 0; blk < kBlocks; ++blk) {
    for (int v = blk; v < geom_.views; v += kBlocks) {
      for (int b = 0; b < geom_.detectors; ++b) {
        const double val = y(v * geom_.detectors + b);
        for (const auto& e : trace_ray(geom_, v, b)) partial[blk](e.pixel) += e.weight * val;
      }
    }
  }
  x.setZero();
  for (const auto& p : partial) x += p;
  return x;
}

}  // namespace mcst::ct
