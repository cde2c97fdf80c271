#include "mcst/pwls_mcst.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>

#include "mcst/errors.hpp"
#include "mcst/regularizer.hpp"

namespace mcst {

void ReconConfig::validate(int layers) const {
  if (!(beta >= 0)) throw ConfigError("recon: beta must be nonnegative");
  if (static_cast<int>(gamma.size()) != layers) {
    throw ConfigError("recon: expected " + std::to_string(layers) + " gamma values");
  }
  for (double g : gamma) {
    if (!(g >= 0)) throw ConfigError("recon: gamma must be nonnegative");
  }
  if (outer < 1 || inner < 1) throw ConfigError("recon: outer and inner iterations must be >= 1");
  if (!(alpha > 1.0 && alpha <= 2.0)) throw ConfigError("recon: alpha must be in (1, 2]");
  if (stride < 1) throw ConfigError("recon: stride must be >= 1");
}

Image image_update(const Image& x, const ct::LinearOperator& a, const ct::WeightedScan& scan,
                   const ModelBundle& model, const McstState& state, const PatchGeometry& geom,
                   const Image& hessian, const ReconConfig& cfg) {
  const int height = static_cast<int>(x.rows()), width = static_cast<int>(x.cols());
  const Vector curvature = flat(hessian);
  auto gradient = [&](const Vector& v) -> Vector {
    return flat(grad_S2(as_image(v, height, width), geom, model, state.codes, state.assignments, cfg.beta));
  };
  LalmState lalm = lalm_start(a, scan, flat(x));
  const LalmOptions opts{cfg.alpha, cfg.nonnegative};
  for (int r = 0; r < cfg.inner; ++r) lalm_step(lalm, a, scan, curvature, gradient, opts);
  return as_image(lalm.x, height, width);
}

std::vector<Assignment> initial_assignments(const ModelBundle& model, const Matrix& patches,
                                            const std::vector<double>& gamma) {
  const int count = static_cast<int>(patches.cols());
  std::vector<Assignment> out(model.layers(), Assignment(count, 0));
  Matrix residual = patches;
  for (int l = 0; l < model.layers(); ++l) {
    const int clusters = model.clusters(l);
    const double g2 = gamma[l] * gamma[l];
    Vector best_cost = Vector::Constant(count, INFINITY);
    Matrix next(residual.rows(), count);
    for (int k = 0; k < clusters; ++k) {
      const Matrix enc = model.transforms[l][k] * residual;
#pragma omp parallel for schedule(static)
      for (int i = 0; i < count; ++i) {
        const double c = enc.col(i).array().square().min(g2).sum();
        if (c < best_cost(i)) {
          best_cost(i) = c;
          out[l][i] = k;
          next.col(i) = enc.col(i) - hard_threshold(enc.col(i), gamma[l]);
        }
      }
    }
    residual = std::move(next);
  }
  return out;
}

namespace {

double objective_terms(const ct::LinearOperator& a, const ct::WeightedScan& scan, const ModelBundle& model,
                       const McstState& state, const ReconConfig& cfg, const Image& x, double& data,
                       double& reg) {
  data = ct::data_fidelity(a, scan, flat(x));
  reg = training_objective(model, state, cfg.gamma);
  return data + cfg.beta * reg;
}

}  // namespace

ReconResult pwls_mcst(const ct::LinearOperator& a, const ct::WeightedScan& scan, const ModelBundle& model,
                      const ReconConfig& cfg, const Image& x0) {
  model.validate();
  cfg.validate(model.layers());
  if (x0.size() != a.cols()) throw InvalidGeometry("pwls_mcst: initial image size mismatch");
  if (!x0.allFinite()) throw NumericalError("pwls_mcst: initial image is not finite");

  const PatchGeometry geom{static_cast<int>(x0.rows()), static_cast<int>(x0.cols()), model.patch_side, cfg.stride};
  geom.validate();
  const Image hessian = hessian_S2(geom, model.layers(), cfg.beta);

  ReconResult result;
  result.image = x0;
  Matrix patches = extract_patches(x0, geom);
  auto assignments = initial_assignments(model, patches, cfg.gamma);
  result.state = make_state(model, std::move(patches), std::move(assignments));
  auto& state = result.state;
  if (cfg.warm_start) {
    for (int l = 0; l < model.layers(); ++l) sparse_code_layer(model, state, l, cfg.gamma[l]);
  }

  auto record = [&](int outer, const char* stage) {
    ReconTraceEntry e{outer, stage, 0, 0, 0};
    e.objective = objective_terms(a, scan, model, state, cfg, result.image, e.data, e.regularizer);
    result.trace.push_back(std::move(e));
  };
  record(0, "init");

  for (int t = 1; t <= cfg.outer; ++t) {
    result.image = image_update(result.image, a, scan, model, state, geom, hessian, cfg);
    state.residuals[0] = extract_patches(result.image, geom);
    repropagate(model, state, 0);
    if (cfg.trace_substeps) record(t, "image");

    for (int l = 0; l < model.layers(); ++l) assign_clusters_layer(model, state, l);
    if (cfg.trace_substeps) record(t, "cluster");
    for (int l = 0; l < model.layers(); ++l) sparse_code_layer(model, state, l, cfg.gamma[l]);
    record(t, "code");

    if (cfg.log_every > 0 && (t % cfg.log_every == 0 || t == cfg.outer)) {
      std::fprintf(stderr, "reconstruct: outer %d/%d objective %.9e\n", t, cfg.outer,
                   result.trace.back().objective);
    }
  }
  return result;
}

void write_recon_trace(const std::vector<ReconTraceEntry>& trace, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << "outer,stage,data,regularizer,objective\n" << std::setprecision(17);
  for (const auto& e : trace) {
    os << e.outer << ',' << e.stage << ',' << e.data << ',' << e.regularizer << ',' << e.objective << '\n';
  }
  if (!os) throw IoError("write failed: " + path.string());
}

}  // namespace mcst
