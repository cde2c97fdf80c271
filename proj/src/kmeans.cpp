#include "mcst/kmeans.hpp"

#include <limits>
#include <random>
#include <string>

#include "mcst/errors.hpp"

namespace mcst {

namespace {

struct Nearest {
  int index = 0;
  double dist2 = 0.0;
};

Nearest nearest_center(const Matrix& centers, const double* x, int n) {
  Nearest best{0, std::numeric_limits<double>::infinity()};
  for (int k = 0; k < centers.cols(); ++k) {
    const double* c = centers.col(k).data();
    double d = 0.0;
    for (int j = 0; j < n; ++j) d += (x[j] - c[j]) * (x[j] - c[j]);
    if (d < best.dist2) best = {k, d};
  }
  return best;
}

// Moves the farthest point (among clusters with >1 member) into every empty
// cluster. Returns true if anything moved.
bool fill_empty(const Matrix& points, Matrix& centers, Assignment& assign, std::vector<double>& dist2) {
  const int k_count = static_cast<int>(centers.cols());
  std::vector<int> sizes(k_count, 0);
  for (int a : assign) ++sizes[a];
  bool moved = false;
  for (int k = 0; k < k_count; ++k) {
    if (sizes[k] > 0) continue;
    int far = -1;
    for (int i = 0; i < static_cast<int>(assign.size()); ++i) {
      if (sizes[assign[i]] > 1 && (far < 0 || dist2[i] > dist2[far])) far = i;
    }
    --sizes[assign[far]];
    ++sizes[k];
    assign[far] = k;
    dist2[far] = 0.0;
    centers.col(k) = points.col(far);
    moved = true;
  }
  return moved;
}

}  // namespace

Assignment kmeans_init(const Matrix& points, int clusters, std::uint64_t seed, int max_iters) {
  const int count = static_cast<int>(points.cols());
  const int n = static_cast<int>(points.rows());
  if (clusters < 1 || clusters > count) {
    throw ConfigError("kmeans: cluster count " + std::to_string(clusters) +
                      " must be in [1, " + std::to_string(count) + "]");
  }
  Assignment assign(count, 0);
  if (clusters == 1) return assign;

  // k-means++ seeding.
  std::mt19937_64 rng(seed);
  Matrix centers(n, clusters);
  std::vector<char> chosen(count, 0);
  std::vector<double> dist2(count, std::numeric_limits<double>::infinity());
  int first = static_cast<int>(std::uniform_int_distribution<int>(0, count - 1)(rng));
  centers.col(0) = points.col(first);
  chosen[first] = 1;
  for (int k = 1; k < clusters; ++k) {
    double total = 0.0;
    for (int i = 0; i < count; ++i) {
      const double d = (points.col(i) - centers.col(k - 1)).squaredNorm();
      if (d < dist2[i]) dist2[i] = d;
      total += dist2[i];
    }
    int pick = -1;
    if (total > 0.0) {
      double target = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (int i = 0; i < count; ++i) {
        target -= dist2[i];
        if (target < 0.0 && dist2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      if (pick < 0) {
        for (int i = count - 1; i >= 0; --i) {
          if (dist2[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      for (int i = 0; i < count && pick < 0; ++i) {
        if (!chosen[i]) pick = i;
      }
    }
    centers.col(k) = points.col(pick);
    chosen[pick] = 1;
  }

  // Lloyd iterations.
  for (int iter = 0; iter < std::max(1, max_iters); ++iter) {
    bool changed = false;
#pragma omp parallel for schedule(static) reduction(|| : changed)
    for (int i = 0; i < count; ++i) {
      const Nearest near = nearest_center(centers, points.col(i).data(), n);
      dist2[i] = near.dist2;
      changed = changed || near.index != assign[i];
      assign[i] = near.index;
    }
    changed = fill_empty(points, centers, assign, dist2) || changed;
    if (!changed && iter > 0) break;

    Matrix sums = Matrix::Zero(n, clusters);
    std::vector<int> sizes(clusters, 0);
    for (int i = 0; i < count; ++i) {
      sums.col(assign[i]) += points.col(i);
      ++sizes[assign[i]];
    }
    for (int k = 0; k < clusters; ++k) centers.col(k) = sums.col(k) / sizes[k];
  }
  return assign;
}

}  // namespace mcst
