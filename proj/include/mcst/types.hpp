#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace mcst {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// H x W image stored row-major so that data() is the raster order used on disk.
using Image = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Cluster index per patch for one layer (0-based).
using Assignment = std::vector<int>;

inline Eigen::Map<const Vector> flat(const Image& img) {
  return {img.data(), img.size()};
}

inline Image as_image(const Vector& v, int height, int width) {
  return Eigen::Map<const Image>(v.data(), height, width);
}

}  // namespace mcst
