#include "mcst/noise.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mcst/errors.hpp"

namespace mcst::ct {

void NoiseModel::validate() const {
  if (!(i0 > 0)) throw ConfigError("noise: I0 must be positive");
  if (!(sigma2 >= 0)) throw ConfigError("noise: sigma2 must be nonnegative");
  if (!(min_counts > 0)) throw ConfigError("noise: count floor must be positive");
}

Vector simulate_counts(const Vector& line_integrals, const NoiseModel& noise) {
  noise.validate();
  if (!line_integrals.allFinite()) throw NumericalError("simulate_counts: non-finite line integrals");
  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> electronic(0.0, std::sqrt(noise.sigma2));
  Vector counts(line_integrals.size());
  for (Eigen::Index i = 0; i < counts.size(); ++i) {
    std::poisson_distribution<long long> photons(noise.i0 * std::exp(-line_integrals(i)));
    double c = static_cast<double>(photons(rng));
    if (noise.sigma2 > 0) c += electronic(rng);
    counts(i) = c;
  }
  return counts;
}

PostLog counts_to_sinogram(const Vector& counts, const NoiseModel& noise) {
  noise.validate();
  PostLog out{Vector(counts.size()), Vector(counts.size())};
  for (Eigen::Index i = 0; i < counts.size(); ++i) {
    out.sinogram(i) = std::log(noise.i0 / std::max(counts(i), noise.min_counts));
    const double c = std::max(counts(i), 0.0);
    const double denom = c + noise.sigma2;
    const double w = denom > 0 ? c * c / denom : 0.0;
    out.weights(i) = std::clamp(w, 0.0, noise.i0);
  }
  return out;
}

}  // namespace mcst::ct
