#pragma once

#include <cstdint>

#include "mcst/types.hpp"

namespace mcst::ct {

// Transmission measurement model: counts = Poisson(I0 exp(-s)) + N(0, sigma2).
struct NoiseModel {
  double i0 = 1e4;
  double sigma2 = 25.0;
  std::uint64_t seed = 0;
  // Counts are clamped to at least this value before the log.
  double min_counts = 0.1;

  void validate() const;
};

// Noisy detector counts for the noiseless line integrals `line_integrals`.
// Sequential over rays from a single seeded stream, so the output depends only
// on the seed.
Vector simulate_counts(const Vector& line_integrals, const NoiseModel& noise);

struct PostLog {
  Vector sinogram;  // y_i = log(I0 / max(counts_i, min_counts))
  Vector weights;   // w_i = c^2 / (c + sigma2), c = max(counts_i, 0), clamped to [0, I0]
};

PostLog counts_to_sinogram(const Vector& counts, const NoiseModel& noise);

}  // namespace mcst::ct
