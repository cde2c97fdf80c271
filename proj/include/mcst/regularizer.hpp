#pragma once

#include <vector>

#include "mcst/mcst_core.hpp"
#include "mcst/patching.hpp"

namespace mcst {

// Regularizer value at fixed codes and clusters: sum over layers and patches of
// ||W r - z||^2 + gamma_l^2 ||z||_0 with R_0 = patches of x.
double regularizer_value(const Image& x, const PatchGeometry& geom, const ModelBundle& model,
                         const std::vector<Matrix>& codes, const std::vector<Assignment>& assignments,
                         const std::vector<double>& gamma);

// Gradient of beta * S2(x) (the quadratic part):
// 2 beta sum_i P_i^T (L P_i x - sum_{q=1..L} b_i^{0<-q}).
Image grad_S2(const Image& x, const PatchGeometry& geom, const ModelBundle& model,
              const std::vector<Matrix>& codes, const std::vector<Assignment>& assignments, double beta);

// Hessian of beta * S2 (diagonal): 2 L beta times the patch overlap counts.
Image hessian_S2(const PatchGeometry& geom, int layers, double beta);

// Relaxation schedule: 1 at r = 0, else pi/(alpha (r+1)) sqrt(1 - (pi/(2 alpha (r+1)))^2).
double rho_schedule(int r, double alpha);

}  // namespace mcst
