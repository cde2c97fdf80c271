#include "mcst/metrics.hpp"

#include <cmath>

#include "mcst/errors.hpp"

namespace mcst {

Mask circular_roi(int height, int width, double radius_px) {
  const double radius = radius_px > 0 ? radius_px : std::min(height, width) / 2.0;
  Mask m(height, width);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const double dy = r - (height - 1) / 2.0, dx = c - (width - 1) / 2.0;
      m(r, c) = dx * dx + dy * dy <= radius * radius;
    }
  }
  return m;
}

double rmse_roi(const Image& estimate, const Image& truth, const Mask& roi) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols() || roi.rows() != truth.rows() ||
      roi.cols() != truth.cols()) {
    throw InvalidGeometry("rmse: image dimensions differ");
  }
  double sum = 0.0;
  long count = 0;
  for (Eigen::Index j = 0; j < truth.size(); ++j) {
    if (!roi.data()[j]) continue;
    const double d = estimate.data()[j] - truth.data()[j];
    sum += d * d;
    ++count;
  }
  if (count == 0) throw ConfigError("rmse: empty region of interest");
  return std::sqrt(sum / static_cast<double>(count));
}

double ssim(const Image& a, const Image& b, const Image& reference, const SsimOptions& opts) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw InvalidGeometry("ssim: image dimensions differ");
  const int w = opts.window;
  if (w < 1 || w > a.rows() || w > a.cols()) throw InvalidGeometry("ssim: window larger than image");
  const double range = opts.dynamic_range > 0 ? opts.dynamic_range : reference.maxCoeff() - reference.minCoeff();
  const double c1 = (opts.k1 * range) * (opts.k1 * range);
  const double c2 = (opts.k2 * range) * (opts.k2 * range);
  const int rows = static_cast<int>(a.rows()) - w + 1;
  const int cols = static_cast<int>(a.cols()) - w + 1;
  const double n = static_cast<double>(w) * w;

  Vector per_row(rows);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    double row_sum = 0.0;
    for (int c = 0; c < cols; ++c) {
      const auto pa = a.block(r, c, w, w);
      const auto pb = b.block(r, c, w, w);
      const double ma = pa.sum() / n, mb = pb.sum() / n;
      const double va = (pa.array() - ma).square().sum() / n;
      const double vb = (pb.array() - mb).square().sum() / n;
      const double cov = ((pa.array() - ma) * (pb.array() - mb)).sum() / n;
      row_sum += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    per_row(r) = row_sum;
  }
  double total = 0.0;
  for (int r = 0; r < rows; ++r) total += per_row(r);
  return total / (static_cast<double>(rows) * cols);
}

}  // namespace mcst
