#include "mcst/lalm.hpp"

#include <string>

#include "mcst/errors.hpp"
#include "mcst/regularizer.hpp"

namespace mcst {

namespace {

Vector weighted_residual_gradient(const ct::LinearOperator& a, const ct::WeightedScan& scan, const Vector& x) {
  return a.adjoint(scan.weights.cwiseProduct(a.forward(x) - scan.y));
}

}  // namespace

LalmState lalm_start(const ct::LinearOperator& a, const ct::WeightedScan& scan, Vector x0) {
  LalmState s;
  s.zeta = weighted_residual_gradient(a, scan, x0);
  s.g = s.zeta;
  s.h = scan.majorizer.cwiseProduct(x0) - s.zeta;
  s.x = std::move(x0);
  s.rho = 1.0;
  s.r = 0;
  return s;
}

void lalm_step(LalmState& state, const ct::LinearOperator& a, const ct::WeightedScan& scan,
               const Vector& reg_curvature, const std::function<Vector(const Vector&)>& reg_gradient,
               const LalmOptions& opts) {
  const double rho = state.rho;
  const double alpha = opts.alpha;
  const Vector& ha = scan.majorizer;

  const Vector s = rho * (ha.cwiseProduct(state.x) - state.h) + (1.0 - rho) * state.g;
  const Vector grad = reg_gradient(state.x);
  const Vector denom = rho * ha + reg_curvature;
  Vector x = state.x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (denom(j) > 0) x(j) -= (s(j) + grad(j)) / denom(j);
    if (opts.nonnegative && x(j) < 0) x(j) = 0.0;
  }
  if (!x.allFinite()) {
    throw NumericalError("image update: non-finite iterate at inner iteration " + std::to_string(state.r));
  }
  state.zeta = weighted_residual_gradient(a, scan, x);
  state.g = (rho / (rho + 1.0)) * (alpha * state.zeta + (1.0 - alpha) * state.g) + state.g / (rho + 1.0);
  state.h = alpha * (ha.cwiseProduct(x) - state.zeta) + (1.0 - alpha) * state.h;
  state.x = std::move(x);
  ++state.r;
  state.rho = rho_schedule(state.r, alpha);
}

}  // namespace mcst
