#include "mcst/transforms.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "mcst/errors.hpp"

namespace mcst {

Matrix dct2_matrix(int n) {
  const int m = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  if (n < 1 || m * m != n) {
    throw InvalidGeometry("dct2_matrix: " + std::to_string(n) + " is not a perfect square");
  }
  Matrix c(m, m);
  for (int k = 0; k < m; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / m);
    for (int j = 0; j < m; ++j) {
      c(k, j) = scale * std::cos(std::numbers::pi * (2 * j + 1) * k / (2.0 * m));
    }
  }
  Matrix d(n, n);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) d.block(a * m, b * m, m, m) = c(a, b) * c;
  }
  return d;
}

Matrix random_orthogonal(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix a(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) a(r, c) = normal(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix& packed = qr.matrixQR();
  for (int j = 0; j < n; ++j) {
    if (packed(j, j) < 0) q.col(j) = -q.col(j);
  }
  return q;
}

Matrix procrustes_rotation(const Matrix& g) {
  if (!g.allFinite()) throw NumericalError("procrustes: non-finite entries in G");
  Eigen::JacobiSVD<Matrix> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix w = svd.matrixV() * svd.matrixU().transpose();
  if (!w.allFinite()) throw NumericalError("procrustes: SVD produced non-finite factors");
  return w;
}

}  // namespace mcst
