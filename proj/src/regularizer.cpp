#include "mcst/regularizer.hpp"

#include <cmath>
#include <numbers>

#include "mcst/errors.hpp"

namespace mcst {

double regularizer_value(const Image& x, const PatchGeometry& geom, const ModelBundle& model,
                         const std::vector<Matrix>& codes, const std::vector<Assignment>& assignments,
                         const std::vector<double>& gamma) {
  McstState state;
  state.residuals = propagate_residuals(extract_patches(x, geom), codes, assignments, model);
  state.codes = codes;
  state.assignments = assignments;
  return training_objective(model, state, gamma);
}

Image grad_S2(const Image& x, const PatchGeometry& geom, const ModelBundle& model,
              const std::vector<Matrix>& codes, const std::vector<Assignment>& assignments, double beta) {
  Matrix columns = extract_patches(x, geom);
  columns *= static_cast<double>(model.layers());
  columns -= backprop_sum(model, codes, assignments, 0);
  Image g = aggregate_patches(columns, geom);
  g *= 2.0 * beta;
  return g;
}

Image hessian_S2(const PatchGeometry& geom, int layers, double beta) {
  return (2.0 * layers * beta) * overlap_counts(geom).cast<double>();
}

double rho_schedule(int r, double alpha) {
  if (r < 0 || !(alpha > 1.0 && alpha <= 2.0)) throw ConfigError("rho_schedule: need r >= 0, alpha in (1, 2]");
  if (r == 0) return 1.0;
  const double a = std::numbers::pi / (alpha * (r + 1));
  const double b = std::numbers::pi / (2.0 * alpha * (r + 1));
  return a * std::sqrt(1.0 - b * b);
}

}  // namespace mcst
