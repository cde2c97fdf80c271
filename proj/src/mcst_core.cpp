#include "mcst/mcst_core.hpp"

#include <cmath>
#include <string>

#include "mcst/errors.hpp"
#include "mcst/transforms.hpp"

namespace mcst {

namespace {

// Column chunk size for parallel dense products; fixed so that results do not
// depend on the number of workers.
constexpr int kChunk = 2048;

std::vector<std::vector<int>> members(const Assignment& assign, int clusters) {
  std::vector<std::vector<int>> out(clusters);
  for (int i = 0; i < static_cast<int>(assign.size()); ++i) out[assign[i]].push_back(i);
  return out;
}

Matrix gather(const Matrix& x, const std::vector<int>& cols) {
  Matrix out(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(j) = x.col(cols[j]);
  return out;
}

// y = w * x (or w^T * x), chunked over columns.
Matrix multiply(const Matrix& w, const Matrix& x, bool transpose) {
  Matrix y(w.rows(), x.cols());
  const int count = static_cast<int>(x.cols());
  const int chunks = (count + kChunk - 1) / kChunk;
#pragma omp parallel for schedule(static)
  for (int c = 0; c < chunks; ++c) {
    const int begin = c * kChunk;
    const int len = std::min(kChunk, count - begin);
    if (transpose) {
      y.middleCols(begin, len).noalias() = w.transpose() * x.middleCols(begin, len);
    } else {
      y.middleCols(begin, len).noalias() = w * x.middleCols(begin, len);
    }
  }
  return y;
}

double squared_norm_sum(const Matrix& m) {
  // Column norms in parallel, summed sequentially.
  Vector col(m.cols());
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < m.cols(); ++i) col(i) = m.col(i).squaredNorm();
  double total = 0.0;
  for (Eigen::Index i = 0; i < col.size(); ++i) total += col(i);
  return total;
}

}  // namespace

void check_state(const ModelBundle& model, const McstState& state) {
  const int layers = model.layers();
  if (state.layers() != layers || static_cast<int>(state.codes.size()) != layers ||
      static_cast<int>(state.assignments.size()) != layers) {
    throw InvariantError("state: layer count does not match model");
  }
  const int n = model.dim();
  const int count = state.patches();
  for (int l = 0; l < layers; ++l) {
    if (state.residuals[l].rows() != n || state.residuals[l].cols() != count ||
        state.codes[l].rows() != n || state.codes[l].cols() != count ||
        static_cast<int>(state.assignments[l].size()) != count) {
      throw InvariantError("state: shape mismatch at layer " + std::to_string(l + 1));
    }
    for (int a : state.assignments[l]) {
      if (a < 0 || a >= model.clusters(l)) {
        throw InvariantError("state: cluster index " + std::to_string(a) + " out of range at layer " +
                             std::to_string(l + 1));
      }
    }
  }
}

McstState make_state(const ModelBundle& model, Matrix patches, std::vector<Assignment> assignments) {
  McstState state;
  const int layers = model.layers();
  if (patches.rows() != model.dim()) {
    throw InvariantError("state: patch dimension " + std::to_string(patches.rows()) +
                         " does not match model dimension " + std::to_string(model.dim()));
  }
  state.codes.assign(layers, Matrix::Zero(patches.rows(), patches.cols()));
  state.assignments = std::move(assignments);
  state.residuals.assign(layers, Matrix());
  state.residuals[0] = std::move(patches);
  for (int l = 1; l < layers; ++l) state.residuals[l] = Matrix::Zero(model.dim(), state.residuals[0].cols());
  check_state(model, state);
  repropagate(model, state, 0);
  return state;
}

Vector hard_threshold(const Vector& v, double t) {
  Vector out = v;
  for (Eigen::Index j = 0; j < out.size(); ++j) {
    if (std::abs(out(j)) < t) out(j) = 0.0;
  }
  return out;
}

void hard_threshold_inplace(Matrix& m, double t) {
  double* d = m.data();
  const Eigen::Index size = m.size();
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < size; ++j) {
    if (std::abs(d[j]) < t) d[j] = 0.0;
  }
}

double effective_threshold(int layer, int layers, double threshold) {
  return threshold / std::sqrt(static_cast<double>(layers - layer));
}

Matrix apply_bank(const std::vector<Matrix>& bank, const Assignment& assign, const Matrix& x,
                  bool transpose) {
  if (bank.size() == 1) return multiply(bank[0], x, transpose);
  Matrix y(bank.front().rows(), x.cols());
  const auto groups = members(assign, static_cast<int>(bank.size()));
  for (std::size_t k = 0; k < bank.size(); ++k) {
    if (groups[k].empty()) continue;
    const Matrix part = multiply(bank[k], gather(x, groups[k]), transpose);
    for (std::size_t j = 0; j < groups[k].size(); ++j) y.col(groups[k][j]) = part.col(j);
  }
  return y;
}

std::vector<Matrix> propagate_residuals(const Matrix& first, const std::vector<Matrix>& codes,
                                        const std::vector<Assignment>& assignments,
                                        const ModelBundle& model) {
  McstState state;
  state.residuals.assign(model.layers(), Matrix());
  state.residuals[0] = first;
  for (int l = 1; l < model.layers(); ++l) state.residuals[l] = Matrix::Zero(first.rows(), first.cols());
  state.codes = codes;
  state.assignments = assignments;
  check_state(model, state);
  repropagate(model, state, 0);
  return std::move(state.residuals);
}

void repropagate(const ModelBundle& model, McstState& state, int layer) {
  for (int l = std::max(layer, 0); l + 1 < model.layers(); ++l) {
    state.residuals[l + 1] = apply_bank(model.transforms[l], state.assignments[l], state.residuals[l]);
    state.residuals[l + 1] -= state.codes[l];
  }
}

Vector backprop_vector(const ModelBundle& model, const std::vector<Matrix>& codes,
                       const std::vector<Assignment>& assignments, int patch, int p, int q) {
  if (p < 0 || q <= p || q > model.layers()) {
    throw InvariantError("backprop_vector: need 0 <= p < q <= L");
  }
  if (patch < 0 || patch >= codes[0].cols()) throw InvariantError("backprop_vector: patch out of range");
  Vector acc = Vector::Zero(model.dim());
  for (int t = q - 1; t >= p; --t) {
    const int k = assignments[t][patch];
    if (k < 0 || k >= model.clusters(t)) throw InvariantError("backprop_vector: cluster out of range");
    acc = model.transforms[t][k].transpose() * (codes[t].col(patch) + acc);
  }
  return acc;
}

Matrix backprop_sum(const ModelBundle& model, const std::vector<Matrix>& codes,
                    const std::vector<Assignment>& assignments, int p) {
  const int layers = model.layers();
  Matrix acc = Matrix::Zero(model.dim(), codes[0].cols());
  for (int t = layers - 1; t >= p; --t) {
    acc += static_cast<double>(layers - t) * codes[t];
    acc = apply_bank(model.transforms[t], assignments[t], acc, true);
  }
  return acc;
}

double encoding_residual_norm(const ModelBundle& model, const McstState& state, int patch, int layer) {
  const int k = state.assignments[layer][patch];
  return (model.transforms[layer][k] * state.residuals[layer].col(patch) - state.codes[layer].col(patch))
      .norm();
}

double encoding_residual_norm_from(const ModelBundle& model, const McstState& state, int patch,
                                   int layer, int base) {
  if (base == layer) return encoding_residual_norm(model, state, patch, layer);
  if (base > layer || base < 0) throw InvariantError("encoding_residual_norm_from: need base <= layer");
  const int k = state.assignments[base][patch];
  const Vector b = backprop_vector(model, state.codes, state.assignments, patch, base + 1, layer + 1);
  return (model.transforms[base][k] * state.residuals[base].col(patch) - state.codes[base].col(patch) - b)
      .norm();
}

void sparse_code_layer(const ModelBundle& model, McstState& state, int layer, double threshold) {
  const int depth = model.layers() - layer;
  Matrix target = apply_bank(model.transforms[layer], state.assignments[layer], state.residuals[layer]);
  if (depth > 1) {
    target -= backprop_sum(model, state.codes, state.assignments, layer + 1) / static_cast<double>(depth);
  }
  hard_threshold_inplace(target, effective_threshold(layer, model.layers(), threshold));
  state.codes[layer] = std::move(target);
  repropagate(model, state, layer);
}

int assign_clusters_layer(const ModelBundle& model, McstState& state, int layer) {
  const int layers = model.layers();
  const int clusters = model.clusters(layer);
  if (clusters == 1) return 0;
  const int count = state.patches();

  // Deeper encoding residuals seen from this layer: for depth j the residual of
  // layer `layer + j` equals ||W_k r - z - B_j|| with B_j independent of k.
  std::vector<Matrix> back;
  {
    Matrix running = Matrix::Zero(model.dim(), count);
    for (int t = layer + 1; t < layers; ++t) {
      Matrix term = state.codes[t];
      for (int m = t; m > layer; --m) term = apply_bank(model.transforms[m], state.assignments[m], term, true);
      running += term;
      back.push_back(running);
    }
  }

  Matrix cost(clusters, count);
  for (int k = 0; k < clusters; ++k) {
    const Matrix enc = multiply(model.transforms[layer][k], state.residuals[layer], false) - state.codes[layer];
#pragma omp parallel for schedule(static)
    for (int i = 0; i < count; ++i) {
      double c = enc.col(i).squaredNorm();
      for (const auto& b : back) c += (enc.col(i) - b.col(i)).squaredNorm();
      cost(k, i) = c;
    }
  }

  int changed = 0;
  auto& assign = state.assignments[layer];
#pragma omp parallel for schedule(static) reduction(+ : changed)
  for (int i = 0; i < count; ++i) {
    const int incumbent = assign[i];
    int best = 0;
    for (int k = 1; k < clusters; ++k) {
      if (cost(k, i) < cost(best, i)) best = k;
    }
    if (best != incumbent && cost(best, i) < cost(incumbent, i) * (1.0 - kTieTolerance)) {
      assign[i] = best;
      ++changed;
    }
  }
  if (changed > 0) repropagate(model, state, layer);
  return changed;
}

void transform_update_layer(ModelBundle& model, McstState& state, int layer) {
  const int depth = model.layers() - layer;
  Matrix target = state.codes[layer];
  if (depth > 1) {
    target += backprop_sum(model, state.codes, state.assignments, layer + 1) / static_cast<double>(depth);
  }
  const auto groups = members(state.assignments[layer], model.clusters(layer));
  std::vector<Matrix> updated(groups.size());
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < static_cast<int>(groups.size()); ++k) {
    if (groups[k].empty()) continue;
    const Matrix g = gather(state.residuals[layer], groups[k]) * gather(target, groups[k]).transpose();
    updated[k] = procrustes_rotation(g);
  }
  for (std::size_t k = 0; k < groups.size(); ++k) {
    if (!groups[k].empty()) model.transforms[layer][k] = std::move(updated[k]);
  }
  repropagate(model, state, layer);
}

double training_objective(const ModelBundle& model, const McstState& state,
                          const std::vector<double>& thresholds) {
  if (static_cast<int>(thresholds.size()) != model.layers()) {
    throw InvariantError("objective: expected one threshold per layer");
  }
  const auto residuals = propagate_residuals(state.residuals[0], state.codes, state.assignments, model);
  double total = 0.0;
  for (int l = 0; l < model.layers(); ++l) {
    const Matrix enc = apply_bank(model.transforms[l], state.assignments[l], residuals[l]) - state.codes[l];
    const auto nonzeros = (state.codes[l].array() != 0.0).count();
    total += squared_norm_sum(enc) + thresholds[l] * thresholds[l] * static_cast<double>(nonzeros);
  }
  return total;
}

std::vector<int> cluster_sizes(const ModelBundle& model, const McstState& state, int layer) {
  std::vector<int> sizes(model.clusters(layer), 0);
  for (int a : state.assignments[layer]) ++sizes[a];
  return sizes;
}

}  // namespace mcst
