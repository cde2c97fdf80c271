#pragma once

#include <vector>

#include "mcst/lalm.hpp"
#include "mcst/scan.hpp"

namespace mcst {

enum class KappaMode { kUniform, kStatistical };

struct EpConfig {
  double beta = 1.0;
  double delta = 20.0;
  int iterations = 300;
  KappaMode kappa = KappaMode::kUniform;
  double alpha = 1.999;
  bool nonnegative = true;

  void validate() const;
};

// phi(t) = delta^2 (sqrt(1 + (t/delta)^2) - 1) and its derivative.
double ep_potential(double t, double delta);
double ep_potential_derivative(double t, double delta);

// R(x) = sum_j sum_{k in N8(j)} kappa_j kappa_k phi(x_j - x_k).
double ep_regularizer(const Image& x, const Image& kappa, double delta);
// Gradient of beta * R.
Image ep_gradient(const Image& x, const Image& kappa, double delta, double beta);
// Diagonal majorizer of the Hessian of beta * R: 4 beta sum_k kappa_j kappa_k.
Image ep_curvature(const Image& kappa, double beta);

// kappa = 1, or sqrt([A^T W 1]_j / [A^T 1]_j) in statistical mode.
Image ep_kappa(const ct::LinearOperator& a, const ct::WeightedScan& scan, int height, int width, KappaMode mode);

struct EpResult {
  Image image;
  std::vector<double> objective;  // after every iteration
};

// PWLS with the edge-preserving regularizer, solved by relaxed LALM with a
// single decreasing rho schedule over all iterations.
EpResult pwls_ep(const ct::LinearOperator& a, const ct::WeightedScan& scan, const EpConfig& cfg, const Image& x0);

}  // namespace mcst
