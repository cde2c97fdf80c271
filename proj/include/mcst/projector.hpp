#pragma once

#include <cstdint>
#include <vector>

#include "mcst/types.hpp"

namespace mcst::ct {

// Parallel-beam scan of an H x W grid. View v sits at angle pi * v / views;
// detector b at offset (b - (detectors - 1) / 2) * detector_mm from the axis.
struct ScanGeometry {
  int height = 128;
  int width = 128;
  double pixel_mm = 1.0;
  int views = 180;
  int detectors = 185;
  double detector_mm = 1.0;
  // Linear attenuation (1/mm) per image unit; 2e-5 maps water at 1000 to 0.02/mm.
  double attenuation_scale = 2e-5;

  void validate() const;
  int rays() const { return views * detectors; }
  int pixels() const { return height * width; }
  double angle(int view) const;
  double detector_offset(int detector) const;
};

// Linear map from images (raster vectors) to measurements and its adjoint.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual Eigen::Index rows() const = 0;
  virtual Eigen::Index cols() const = 0;
  virtual Vector forward(const Vector& x) const = 0;
  virtual Vector adjoint(const Vector& y) const = 0;
};

// Dense matrix operator; handy for small problems and tests.
class MatrixOperator final : public LinearOperator {
 public:
  explicit MatrixOperator(Matrix a) : a_(std::move(a)) {}
  Eigen::Index rows() const override { return a_.rows(); }
  Eigen::Index cols() const override { return a_.cols(); }
  Vector forward(const Vector& x) const override { return a_ * x; }
  Vector adjoint(const Vector& y) const override { return a_.transpose() * y; }

 private:
  Matrix a_;
};

struct RayEntry {
  std::int32_t pixel;
  double weight;
};

// Exact intersection lengths (mm) of one ray with the pixel grid, in traversal
// order, multiplied by the attenuation scale. An axis-parallel ray lying on a
// pixel boundary is split equally between the pixels on either side.
std::vector<RayEntry> trace_ray(const ScanGeometry& geom, int view, int detector);

// Ray-driven (Siddon) parallel-beam system matrix. The sparse matrix and its
// transpose are cached when they fit in `cache_bytes`; otherwise rays are
// traced on the fly. Both paths are exact adjoint pairs.
class ParallelBeamProjector final : public LinearOperator {
 public:
  explicit ParallelBeamProjector(const ScanGeometry& geom, std::size_t cache_bytes = std::size_t{1} << 31);

  Eigen::Index rows() const override { return geom_.rays(); }
  Eigen::Index cols() const override { return geom_.pixels(); }
  Vector forward(const Vector& x) const override;
  Vector adjoint(const Vector& y) const override;

  const ScanGeometry& geometry() const { return geom_; }
  bool cached() const { return !row_ptr_.empty(); }

 private:
  ScanGeometry geom_;
  // CSR by ray and by pixel.
  std::vector<std::int64_t> row_ptr_;
  std::vector<std::int32_t> col_idx_;
  std::vector<double> values_;
  std::vector<std::int64_t> col_ptr_;
  std::vector<std::int32_t> row_idx_;
  std::vector<double> values_t_;
};

}  // namespace mcst::ct
