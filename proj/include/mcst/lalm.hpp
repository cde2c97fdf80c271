#pragma once

#include <functional>

#include "mcst/scan.hpp"
#include "mcst/types.hpp"

namespace mcst {

// Relaxed linearized augmented Lagrangian iterate for
//   min_x 1/2 ||y - A x||_W^2 + R(x)   (optionally x >= 0)
// with a separable quadratic majorizer of R.
struct LalmState {
  Vector x;
  Vector g;
  Vector h;
  Vector zeta;
  double rho = 1.0;
  int r = 0;
};

struct LalmOptions {
  double alpha = 1.999;
  bool nonnegative = true;
};

// g = zeta = A^T W (A x0 - y), h = H_A x0 - zeta, rho = 1, r = 0.
LalmState lalm_start(const ct::LinearOperator& a, const ct::WeightedScan& scan, Vector x0);

// One inner iteration with the current rho, then rho <- rho_{r+1}.
// `reg_gradient(x)` returns the regularizer gradient; `reg_curvature` is its
// diagonal majorizer. Pixels whose total curvature is zero are left unchanged.
// Throws NumericalError if the new iterate is not finite.
void lalm_step(LalmState& state, const ct::LinearOperator& a, const ct::WeightedScan& scan,
               const Vector& reg_curvature, const std::function<Vector(const Vector&)>& reg_gradient,
               const LalmOptions& opts);

}  // namespace mcst
