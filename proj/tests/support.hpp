#pragma once

#include <Eigen/QR>
#include <random>
#include <vector>

#include "mcst/mcst_core.hpp"
#include "mcst/model.hpp"

namespace testsupport {

using mcst::Assignment;
using mcst::Matrix;
using mcst::Vector;

inline Matrix gaussian(int rows, int cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = n(rng);
  return m;
}

// Haar-distributed orthogonal matrix, generated independently of the library.
inline Matrix haar_orthogonal(int n, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix> qr(gaussian(n, n, rng));
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  return q;
}

inline mcst::ModelBundle random_model(int side, const std::vector<int>& clusters, std::mt19937_64& rng) {
  mcst::ModelBundle m;
  m.patch_side = side;
  for (int k : clusters) {
    std::vector<Matrix> bank;
    for (int j = 0; j < k; ++j) bank.push_back(haar_orthogonal(side * side, rng));
    m.transforms.push_back(bank);
    m.thresholds.push_back(1.0);
  }
  return m;
}

inline std::vector<Assignment> random_assignments(const mcst::ModelBundle& m, int count, std::mt19937_64& rng) {
  std::vector<Assignment> out;
  for (int l = 0; l < m.layers(); ++l) {
    std::uniform_int_distribution<int> u(0, m.clusters(l) - 1);
    Assignment a(count);
    for (auto& v : a) v = u(rng);
    out.push_back(a);
  }
  return out;
}

// Random sparse codes: each entry nonzero with probability 1/2.
inline std::vector<Matrix> random_codes(int layers, int n, int count, std::mt19937_64& rng, double scale = 1.0) {
  std::bernoulli_distribution keep(0.5);
  std::vector<Matrix> out;
  for (int l = 0; l < layers; ++l) {
    Matrix z = gaussian(n, count, rng, scale);
    for (int j = 0; j < count; ++j)
      for (int i = 0; i < n; ++i)
        if (!keep(rng)) z(i, j) = 0.0;
    out.push_back(z);
  }
  return out;
}

// Per-patch residual chain by plain loops: r_0 = x, r_{l+1} = W r_l - z_l.
inline std::vector<Vector> naive_chain(const mcst::ModelBundle& m, const Vector& x,
                                       const std::vector<Vector>& codes, const std::vector<int>& clusters) {
  std::vector<Vector> r{x};
  for (int l = 0; l + 1 < m.layers(); ++l) {
    const Matrix& w = m.transforms[l][clusters[l]];
    Vector next = Vector::Zero(x.size());
    for (int i = 0; i < w.rows(); ++i) {
      double acc = 0.0;
      for (int j = 0; j < w.cols(); ++j) acc += w(i, j) * r.back()(j);
      next(i) = acc - codes[l](i);
    }
    r.push_back(next);
  }
  return r;
}

// Per-layer encoding residuals ||W_l r_l - z_l|| of one patch.
inline std::vector<double> naive_encoding_norms(const mcst::ModelBundle& m, const Vector& x,
                                                const std::vector<Vector>& codes,
                                                const std::vector<int>& clusters) {
  const auto r = naive_chain(m, x, codes, clusters);
  std::vector<double> out;
  for (int l = 0; l < m.layers(); ++l) {
    out.push_back((m.transforms[l][clusters[l]] * r[l] - codes[l]).norm());
  }
  return out;
}

inline std::vector<Vector> patch_codes(const std::vector<Matrix>& codes, int patch) {
  std::vector<Vector> out;
  for (const auto& z : codes) out.push_back(z.col(patch));
  return out;
}

inline std::vector<int> patch_clusters(const std::vector<Assignment>& a, int patch) {
  std::vector<int> out;
  for (const auto& v : a) out.push_back(v[patch]);
  return out;
}

}  // namespace testsupport
