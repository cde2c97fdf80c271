#pragma once

#include "mcst/projector.hpp"
#include "mcst/types.hpp"

namespace mcst::ct {

// Post-log data with statistical weights and the diagonal majorizer of A^T W A.
struct WeightedScan {
  Vector y;
  Vector weights;
  Vector majorizer;  // per pixel
};

// H_A = A^T (W (A 1)). Dominates A^T W A for nonnegative A.
Vector majorizer(const LinearOperator& a, const Vector& weights);

WeightedScan make_weighted_scan(const LinearOperator& a, Vector y, Vector weights);

// 1/2 ||y - A x||_W^2
double data_fidelity(const LinearOperator& a, const WeightedScan& scan, const Vector& x);

}  // namespace mcst::ct
