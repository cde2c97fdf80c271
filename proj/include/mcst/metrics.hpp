#pragma once

#include "mcst/types.hpp"

namespace mcst {

using Mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Pixels whose centers lie inside the circle inscribed in the image
// (radius = min(H, W) / 2 unless given in pixels).
Mask circular_roi(int height, int width, double radius_px = -1.0);

// sqrt(sum_{ROI} (a - b)^2 / |ROI|). Throws ConfigError on an empty ROI.
double rmse_roi(const Image& estimate, const Image& truth, const Mask& roi);

struct SsimOptions {
  int window = 8;
  double k1 = 0.01;
  double k2 = 0.03;
  // <= 0: max(reference) - min(reference).
  double dynamic_range = -1.0;
};

// Mean SSIM over all window positions (uniform window, stride 1, population
// moments). The dynamic range is taken from `reference`.
double ssim(const Image& a, const Image& b, const Image& reference, const SsimOptions& opts = {});
inline double ssim(const Image& estimate, const Image& truth, const SsimOptions& opts = {}) {
  return ssim(estimate, truth, truth, opts);
}

}  // namespace mcst
