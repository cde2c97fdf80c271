#pragma once

#include <cstdint>

#include "mcst/types.hpp"

namespace mcst {

// Lloyd's algorithm on the columns of `points` with k-means++ seeding.
// Deterministic per seed; every cluster ends up nonempty (an emptied cluster is
// re-seeded with the point farthest from its current center).
// Throws ConfigError if clusters < 1 or clusters > points.cols().
Assignment kmeans_init(const Matrix& points, int clusters, std::uint64_t seed, int max_iters);

}  // namespace mcst
