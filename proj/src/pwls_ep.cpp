#include "mcst/pwls_ep.hpp"

#include <cmath>

#include "mcst/errors.hpp"

namespace mcst {

void EpConfig::validate() const {
  if (!(delta > 0)) throw ConfigError("ep: delta must be positive");
  if (!(beta >= 0)) throw ConfigError("ep: beta must be nonnegative");
  if (iterations < 1) throw ConfigError("ep: iterations must be >= 1");
  if (!(alpha > 1.0 && alpha <= 2.0)) throw ConfigError("ep: alpha must be in (1, 2]");
}

double ep_potential(double t, double delta) {
  const double u = t / delta;
  // sqrt(1+u^2) - 1 written to avoid cancellation for small u.
  return delta * delta * (u * u) / (std::sqrt(1.0 + u * u) + 1.0);
}

double ep_potential_derivative(double t, double delta) {
  const double u = t / delta;
  return t / std::sqrt(1.0 + u * u);
}

namespace {

constexpr int kOffsets[8][2] = {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1}};

template <typename F>
void for_neighbors(int rows, int cols, int r, int c, F&& f) {
  for (const auto& o : kOffsets) {
    const int rr = r + o[0], cc = c + o[1];
    if (rr >= 0 && rr < rows && cc >= 0 && cc < cols) f(rr, cc);
  }
}

}  // namespace

double ep_regularizer(const Image& x, const Image& kappa, double delta) {
  double total = 0.0;
  for (int r = 0; r < x.rows(); ++r) {
    for (int c = 0; c < x.cols(); ++c) {
      for_neighbors(x.rows(), x.cols(), r, c, [&](int rr, int cc) {
        total += kappa(r, c) * kappa(rr, cc) * ep_potential(x(r, c) - x(rr, cc), delta);
      });
    }
  }
  return total;
}

Image ep_gradient(const Image& x, const Image& kappa, double delta, double beta) {
  Image g(x.rows(), x.cols());
  const int rows = static_cast<int>(x.rows()), cols = static_cast<int>(x.cols());
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double acc = 0.0;
      // Each unordered pair appears twice in R, hence the factor 2.
      for_neighbors(rows, cols, r, c, [&](int rr, int cc) {
        acc += kappa(r, c) * kappa(rr, cc) * ep_potential_derivative(x(r, c) - x(rr, cc), delta);
      });
      g(r, c) = 2.0 * beta * acc;
    }
  }
  return g;
}

Image ep_curvature(const Image& kappa, double beta) {
  Image d(kappa.rows(), kappa.cols());
  const int rows = static_cast<int>(kappa.rows()), cols = static_cast<int>(kappa.cols());
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double acc = 0.0;
      for_neighbors(rows, cols, r, c, [&](int rr, int cc) { acc += kappa(r, c) * kappa(rr, cc); });
      d(r, c) = 4.0 * beta * acc;
    }
  }
  return d;
}

Image ep_kappa(const ct::LinearOperator& a, const ct::WeightedScan& scan, int height, int width, KappaMode mode) {
  if (mode == KappaMode::kUniform) return Image::Ones(height, width);
  const Vector num = a.adjoint(scan.weights);
  const Vector den = a.adjoint(Vector::Ones(a.rows()));
  Vector k(num.size());
  for (Eigen::Index j = 0; j < k.size(); ++j) k(j) = den(j) > 0 ? std::sqrt(num(j) / den(j)) : 0.0;
  return as_image(k, height, width);
}

EpResult pwls_ep(const ct::LinearOperator& a, const ct::WeightedScan& scan, const EpConfig& cfg, const Image& x0) {
  cfg.validate();
  if (x0.size() != a.cols()) throw InvalidGeometry("pwls_ep: initial image size mismatch");
  const int height = static_cast<int>(x0.rows()), width = static_cast<int>(x0.cols());
  const Image kappa = ep_kappa(a, scan, height, width, cfg.kappa);
  const Vector curvature = flat(ep_curvature(kappa, cfg.beta));
  auto gradient = [&](const Vector& v) -> Vector {
    return flat(ep_gradient(as_image(v, height, width), kappa, cfg.delta, cfg.beta));
  };

  EpResult result;
  LalmState lalm = lalm_start(a, scan, flat(x0));
  const LalmOptions opts{cfg.alpha, cfg.nonnegative};
  for (int it = 0; it < cfg.iterations; ++it) {
    lalm_step(lalm, a, scan, curvature, gradient, opts);
    const Image x = as_image(lalm.x, height, width);
    result.objective.push_back(ct::data_fidelity(a, scan, lalm.x) + cfg.beta * ep_regularizer(x, kappa, cfg.delta));
  }
  result.image = as_image(lalm.x, height, width);
  return result;
}

}  // namespace mcst
