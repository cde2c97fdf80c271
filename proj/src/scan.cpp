#include "mcst/scan.hpp"

#include "mcst/errors.hpp"

namespace mcst::ct {

Vector majorizer(const LinearOperator& a, const Vector& weights) {
  if (weights.size() != a.rows()) throw InvalidGeometry("majorizer: weight count mismatch");
  if ((weights.array() < 0).any()) throw ConfigError("majorizer: weights must be nonnegative");
  const Vector ones = Vector::Ones(a.cols());
  return a.adjoint(weights.cwiseProduct(a.forward(ones)));
}

WeightedScan make_weighted_scan(const LinearOperator& a, Vector y, Vector weights) {
  if (y.size() != a.rows()) throw InvalidGeometry("scan: sinogram size mismatch");
  WeightedScan scan;
  scan.majorizer = majorizer(a, weights);
  scan.y = std::move(y);
  scan.weights = std::move(weights);
  return scan;
}

double data_fidelity(const LinearOperator& a, const WeightedScan& scan, const Vector& x) {
  const Vector r = a.forward(x) - scan.y;
  return 0.5 * r.cwiseProduct(scan.weights).dot(r);
}

}  // namespace mcst::ct
