#pragma once

#include <vector>

#include "mcst/model.hpp"
#include "mcst/types.hpp"

namespace mcst {

// Layer indices are 0-based throughout. Layer l maps its residual R_l to
// W_{l,k} R_l; the next residual is R_{l+1} = W_{l,k} R_l - Z_l.
struct McstState {
  std::vector<Matrix> residuals;        // R_0 .. R_{L-1}, each n x N
  std::vector<Matrix> codes;            // Z_0 .. Z_{L-1}, each n x N
  std::vector<Assignment> assignments;  // cluster of every patch, per layer

  int layers() const { return static_cast<int>(residuals.size()); }
  int patches() const { return residuals.empty() ? 0 : static_cast<int>(residuals[0].cols()); }
};

// A candidate cluster must beat the incumbent's cost by more than this relative
// margin to take over a patch; anything closer is a tie and keeps the incumbent.
inline constexpr double kTieTolerance = 1e-12;

// State with zero codes, the given assignments and residuals propagated from
// `patches`. Throws InvariantError on shape or range errors.
McstState make_state(const ModelBundle& model, Matrix patches, std::vector<Assignment> assignments);

// Throws InvariantError unless the state is shape-consistent with the model and
// every assignment index is in range.
void check_state(const ModelBundle& model, const McstState& state);

// Zeroes entries with magnitude strictly below t.
Vector hard_threshold(const Vector& v, double t);
void hard_threshold_inplace(Matrix& m, double t);

// Threshold actually applied by sparse coding at `layer`: t / sqrt(L - layer).
double effective_threshold(int layer, int layers, double threshold);

// Column i of the result is W_{k(i)} x_i (or W_{k(i)}^T x_i).
Matrix apply_bank(const std::vector<Matrix>& bank, const Assignment& assign, const Matrix& x,
                  bool transpose = false);

// Residual stack from R_0 = first: R_{l+1} = W_{l,k(i,l)} R_l - Z_l.
std::vector<Matrix> propagate_residuals(const Matrix& first, const std::vector<Matrix>& codes,
                                        const std::vector<Assignment>& assignments,
                                        const ModelBundle& model);

// Recomputes residuals of layers after `layer` in place.
void repropagate(const ModelBundle& model, McstState& state, int layer);

// Back-propagation vector of patch i: sum over t in [p, q) of
// W_p^T W_{p+1}^T ... W_t^T z_t, i.e. the codes of layers p..q-1 expressed in
// the coordinates of residual R_p. Requires 0 <= p < q <= L.
Vector backprop_vector(const ModelBundle& model, const std::vector<Matrix>& codes,
                       const std::vector<Assignment>& assignments, int patch, int p, int q);

// Column-wise sum over q = p+1..L of backprop_vector(., p, q), for all patches.
// p == L yields zeros.
Matrix backprop_sum(const ModelBundle& model, const std::vector<Matrix>& codes,
                    const std::vector<Assignment>& assignments, int p);

// ||W_{s,k} r_{s,i} - z_{s,i}||_2 from the stored residual.
double encoding_residual_norm(const ModelBundle& model, const McstState& state, int patch, int layer);

// Same quantity evaluated from an earlier layer `base` < `layer`:
// ||W_{base,k} r_{base,i} - z_{base,i} - backprop_vector(base+1, layer+1)||_2.
double encoding_residual_norm_from(const ModelBundle& model, const McstState& state, int patch,
                                   int layer, int base);

// Exact minimizer over Z_layer of the layer..L-1 encoding residuals plus
// threshold^2 ||Z_layer||_0, with all other variables fixed. Residuals of deeper
// layers are re-propagated.
void sparse_code_layer(const ModelBundle& model, McstState& state, int layer, double threshold);

// Per-patch cluster choice at `layer` with codes and deeper assignments fixed.
// Ties keep the incumbent. Returns the number of patches that changed cluster.
int assign_clusters_layer(const ModelBundle& model, McstState& state, int layer);

// Procrustes update of every transform in `layer`; empty clusters are skipped.
void transform_update_layer(ModelBundle& model, McstState& state, int layer);

// Sum over layers and patches of ||W r - z||^2 + threshold_l^2 ||z||_0, with
// residuals re-propagated from R_0.
double training_objective(const ModelBundle& model, const McstState& state,
                          const std::vector<double>& thresholds);

// Patch counts per cluster of one layer.
std::vector<int> cluster_sizes(const ModelBundle& model, const McstState& state, int layer);

}  // namespace mcst
