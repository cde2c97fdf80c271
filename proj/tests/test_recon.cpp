#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mcst/errors.hpp"
#include "mcst/lalm.hpp"
#include "mcst/metrics.hpp"
#include "mcst/pwls_ep.hpp"
#include "mcst/pwls_mcst.hpp"
#include "mcst/regularizer.hpp"
#include "support.hpp"

using namespace mcst;
using namespace testsupport;

namespace {

// Small dense nonnegative system.
ct::MatrixOperator random_system(int rays, int pixels, std::mt19937_64& rng) {
  return ct::MatrixOperator(gaussian(rays, pixels, rng).cwiseAbs());
}

}  // namespace

TEST_CASE("rho schedule") {
  CHECK(rho_schedule(0, 1.999) == 1.0);
  const double r1 = std::numbers::pi / (1.999 * 2) * std::sqrt(1 - std::pow(std::numbers::pi / (2 * 1.999 * 2), 2));
  CHECK(rho_schedule(1, 1.999) == doctest::Approx(r1).epsilon(1e-14));
  for (int r = 1; r < 50; ++r) CHECK(rho_schedule(r + 1, 1.999) < rho_schedule(r, 1.999));
  CHECK_THROWS_AS(rho_schedule(-1, 1.5), ConfigError);
  CHECK_THROWS_AS(rho_schedule(1, 1.0), ConfigError);
  CHECK_THROWS_AS(rho_schedule(1, 2.5), ConfigError);
}

TEST_CASE("regularizer gradient matches finite differences and the Hessian is exact") {
  std::mt19937_64 rng(41);
  const ModelBundle m = random_model(3, {2, 3}, rng);
  const PatchGeometry g{9, 8, 3, 1};
  const Image x = gaussian(9, 8, rng, 5.0);
  const auto codes = random_codes(2, 9, g.count(), rng, 3.0);
  const auto assign = random_assignments(m, g.count(), rng);
  const double beta = 0.7;
  const std::vector<double> zero{0.0, 0.0};
  const Image grad = grad_S2(x, g, m, codes, assign, beta);
  const double h = 1e-3;
  for (int j = 0; j < x.size(); ++j) {
    Image xp = x, xm = x;
    xp.data()[j] += h;
    xm.data()[j] -= h;
    const double fd = beta * (regularizer_value(xp, g, m, codes, assign, zero) -
                              regularizer_value(xm, g, m, codes, assign, zero)) / (2 * h);
    CHECK(grad.data()[j] == doctest::Approx(fd).epsilon(1e-6));
  }
  const Image hess = hessian_S2(g, 2, beta);
  const Eigen::MatrixXi overlap = overlap_counts(g);
  for (int j = 0; j < x.size(); ++j) {
    CHECK(hess.data()[j] == 2 * 2 * beta * overlap(j / 8, j % 8));
    Image e = Image::Zero(9, 8);
    e.data()[j] = 1.0;
    const Image diff = grad_S2(x + e, g, m, codes, assign, beta) - grad;
    CHECK(diff.data()[j] == doctest::Approx(hess.data()[j]).epsilon(1e-10));
    CHECK(diff.cwiseAbs().sum() == doctest::Approx(hess.data()[j]).epsilon(1e-10));
  }
}

TEST_CASE("relaxed LALM converges to the penalized least-squares solution") {
  std::mt19937_64 rng(42);
  const int n = 6;
  const auto a = random_system(15, n, rng);
  const Vector xt = gaussian(n, 1, rng).cwiseAbs() + Vector::Ones(n);
  const Vector w = gaussian(15, 1, rng).cwiseAbs() + Vector::Constant(15, 0.5);
  const ct::WeightedScan scan = ct::make_weighted_scan(a, a.forward(xt), w);
  const double lambda = 0.3;
  Matrix dense(15, n);
  for (int j = 0; j < n; ++j) dense.col(j) = a.forward(Vector::Unit(n, j));
  const Matrix normal = dense.transpose() * w.asDiagonal() * dense + lambda * Matrix::Identity(n, n);
  const Vector exact = normal.ldlt().solve(dense.transpose() * w.asDiagonal() * scan.y);
  REQUIRE(exact.minCoeff() > 0);

  LalmState s = lalm_start(a, scan, Vector::Zero(n));
  const Vector curv = Vector::Constant(n, lambda);
  auto grad = [&](const Vector& x) -> Vector { return lambda * x; };
  for (int outer = 0; outer < 400; ++outer) {
    s.rho = 1.0;
    s.r = 0;
    for (int r = 0; r < 3; ++r) lalm_step(s, a, scan, curv, grad, {1.999, true});
  }
  CHECK((s.x - exact).norm() < 1e-6 * exact.norm());
}

TEST_CASE("nonnegativity and zero-curvature pixels") {
  std::mt19937_64 rng(43);
  Matrix dense = gaussian(8, 3, rng).cwiseAbs();
  dense.col(2).setZero();
  const ct::MatrixOperator a(dense);
  Vector y = Vector::Constant(8, -5.0);
  const auto scan = ct::make_weighted_scan(a, y, Vector::Ones(8));
  Vector x0(3);
  x0 << 1, 2, 3;
  LalmState s = lalm_start(a, scan, x0);
  lalm_step(s, a, scan, Vector::Zero(3), [](const Vector& v) -> Vector { return Vector::Zero(v.size()); },
            {1.999, true});
  CHECK(s.x.minCoeff() >= 0.0);
  CHECK(s.x(2) == 3.0);
  CHECK(s.r == 1);
  CHECK(s.rho == rho_schedule(1, 1.999));
}

TEST_CASE("edge-preserving potential") {
  CHECK(ep_potential(0, 20) == 0.0);
  CHECK(ep_potential(3, 20) == doctest::Approx(400 * (std::sqrt(1 + 9.0 / 400) - 1)));
  CHECK(ep_potential(1e-6, 20) == doctest::Approx(0.5e-12).epsilon(1e-8));
  CHECK(ep_potential(-7, 5) == ep_potential(7, 5));
  for (double t : {-50.0, -1.0, 0.3, 12.0}) {
    const double h = 1e-5;
    const double fd = (ep_potential(t + h, 20) - ep_potential(t - h, 20)) / (2 * h);
    CHECK(ep_potential_derivative(t, 20) == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("edge-preserving gradient and curvature bound") {
  std::mt19937_64 rng(44);
  const Image x = gaussian(6, 7, rng, 30.0);
  const Image kappa = gaussian(6, 7, rng).cwiseAbs() + Image::Constant(6, 7, 0.5);
  const double beta = 1.3, delta = 10;
  const Image g = ep_gradient(x, kappa, delta, beta);
  for (int j = 0; j < x.size(); ++j) {
    Image xp = x, xm = x;
    const double h = 1e-4;
    xp.data()[j] += h;
    xm.data()[j] -= h;
    const double fd = beta * (ep_regularizer(xp, kappa, delta) - ep_regularizer(xm, kappa, delta)) / (2 * h);
    CHECK(g.data()[j] == doctest::Approx(fd).epsilon(1e-6));
  }
  // Quadratic majorization along random directions.
  const Image c = ep_curvature(kappa, beta);
  for (int t = 0; t < 20; ++t) {
    const Image d = gaussian(6, 7, rng, 10.0);
    const double lhs = beta * ep_regularizer(x + d, kappa, delta);
    const double rhs = beta * ep_regularizer(x, kappa, delta) + (g.array() * d.array()).sum() +
                       0.5 * (c.array() * d.array().square()).sum();
    CHECK(lhs <= rhs * (1 + 1e-12));
  }
}

TEST_CASE("pwls-ep decreases its objective") {
  std::mt19937_64 rng(45);
  const int h = 8, w = 8;
  const auto a = random_system(100, h * w, rng);
  const Vector xt = gaussian(h * w, 1, rng).cwiseAbs();
  const auto scan = ct::make_weighted_scan(a, a.forward(xt), Vector::Ones(100));
  EpConfig cfg;
  cfg.beta = 0.1;
  cfg.delta = 1;
  cfg.iterations = 50;
  const auto r = pwls_ep(a, scan, cfg, Image::Zero(h, w));
  REQUIRE(r.objective.size() == 50);
  CHECK(r.objective.back() < r.objective.front());
  CHECK(r.image.minCoeff() >= 0);
  cfg.delta = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("initial assignments minimize the single-layer cost") {
  std::mt19937_64 rng(46);
  const ModelBundle m = random_model(2, {3, 2}, rng);
  const Matrix p = gaussian(4, 20, rng, 4.0);
  const std::vector<double> gamma{2.0, 1.0};
  const auto a = initial_assignments(m, p, gamma);
  for (int i = 0; i < 20; ++i) {
    auto cost = [&](int k) { return (m.transforms[0][k] * p.col(i)).array().square().min(4.0).sum(); };
    for (int k = 0; k < 3; ++k) CHECK(cost(a[0][i]) <= cost(k));
  }
}

TEST_CASE("pwls-mcst cluster and code stages never increase the objective") {
  std::mt19937_64 rng(47);
  const int h = 10, w = 10;
  const auto a = random_system(150, h * w, rng);
  const Image xt = gaussian(h, w, rng, 5.0).cwiseAbs();
  const auto scan = ct::make_weighted_scan(a, a.forward(flat(xt)), Vector::Ones(150));
  const ModelBundle m = random_model(2, {2, 2}, rng);
  ReconConfig cfg;
  cfg.beta = 0.05;
  cfg.gamma = {1.0, 0.5};
  cfg.outer = 5;
  cfg.trace_substeps = true;
  const auto r = pwls_mcst(a, scan, m, cfg, xt);
  REQUIRE(r.trace.size() == 1 + 5 * 3);
  for (std::size_t i = 1; i < r.trace.size(); ++i) {
    if (r.trace[i].stage != "image") {
      CHECK(r.trace[i].objective <= r.trace[i - 1].objective * (1 + 1e-12));
    }
  }
  cfg.gamma = {1.0};
  CHECK_THROWS_AS(pwls_mcst(a, scan, m, cfg, xt), ConfigError);
}

TEST_CASE("metrics") {
  Image a = Image::Constant(16, 16, 2.0);
  Image b = Image::Constant(16, 16, 5.0);
  const Mask roi = circular_roi(16, 16);
  CHECK(roi(8, 8));
  CHECK_FALSE(roi(0, 0));
  CHECK(rmse_roi(a, b, roi) == doctest::Approx(3.0));
  CHECK_THROWS_AS(rmse_roi(a, b, Mask::Constant(16, 16, false)), ConfigError);

  std::mt19937_64 rng(48);
  const Image x = gaussian(20, 20, rng, 10.0);
  const Image y = x + gaussian(20, 20, rng, 3.0);
  CHECK(ssim(x, x) == doctest::Approx(1.0).epsilon(1e-14));
  SsimOptions fixed;
  fixed.dynamic_range = 50.0;
  CHECK(std::abs(ssim(x, y, fixed) - ssim(y, x, fixed)) < 1e-12);
  CHECK(ssim(y, x) < 1.0);
}
