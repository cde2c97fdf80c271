#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mcst/lalm.hpp"
#include "mcst/mcst_core.hpp"
#include "mcst/patching.hpp"
#include "mcst/scan.hpp"

namespace mcst {

struct ReconConfig {
  double beta = 9e4;
  std::vector<double> gamma{30.0, 10.0};
  int outer = 100;
  int inner = 2;
  double alpha = 1.999;
  bool nonnegative = true;
  int stride = 1;
  // Sparse-code every layer at the initial image before the first image update
  // (codes start at zero otherwise).
  bool warm_start = true;
  // Also record the objective after the image and cluster updates.
  bool trace_substeps = false;
  int log_every = 0;

  void validate(int layers) const;
};

// Image update with codes and clusters fixed: `cfg.inner` relaxed-LALM
// iterations started from `x` (rho reset to 1). `hessian` is the precomputed
// diagonal of beta * S2. Returns the final iterate.
Image image_update(const Image& x, const ct::LinearOperator& a, const ct::WeightedScan& scan,
                   const ModelBundle& model, const McstState& state, const PatchGeometry& geom,
                   const Image& hessian, const ReconConfig& cfg);

// Cluster choice used before the first outer iteration: layer by layer, each
// patch takes the cluster with the lowest single-layer cost
// min_z ||W_k r - z||^2 + gamma^2 ||z||_0 (ties to the lower index).
std::vector<Assignment> initial_assignments(const ModelBundle& model, const Matrix& patches,
                                            const std::vector<double>& gamma);

struct ReconTraceEntry {
  int outer = 0;
  std::string stage;  // "init", "image", "cluster", "code"
  double data = 0.0;
  double regularizer = 0.0;  // S at the current codes and clusters
  double objective = 0.0;    // data + beta * regularizer
};

struct ReconResult {
  Image image;
  std::vector<ReconTraceEntry> trace;
  McstState state;
};

// Penalized weighted least squares with the model as regularizer: each outer
// iteration runs an image update, then cluster updates for every layer, then
// sparse coding for every layer.
ReconResult pwls_mcst(const ct::LinearOperator& a, const ct::WeightedScan& scan, const ModelBundle& model,
                      const ReconConfig& cfg, const Image& x0);

// CSV "outer,stage,data,regularizer,objective".
void write_recon_trace(const std::vector<ReconTraceEntry>& trace, const std::filesystem::path& path);

}  // namespace mcst
