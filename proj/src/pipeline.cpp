#include "mcst/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>

#include "mcst/errors.hpp"
#include "mcst/fbp.hpp"
#include "mcst/metrics.hpp"
#include "mcst/model.hpp"
#include "mcst/noise.hpp"
#include "mcst/patching.hpp"
#include "mcst/phantom.hpp"
#include "mcst/pwls_ep.hpp"
#include "mcst/pwls_mcst.hpp"
#include "mcst/scan.hpp"
#include "mcst/training.hpp"

namespace mcst {

namespace fs = std::filesystem;

SimulatedScan simulate_scan(const ct::LinearOperator& a, const Image& truth, const ct::NoiseModel& noise) {
  SimulatedScan out;
  out.line_integrals = a.forward(flat(truth));
  out.counts = ct::simulate_counts(out.line_integrals, noise);
  out.post = ct::counts_to_sinogram(out.counts, noise);
  return out;
}

void write_scan_files(const std::string& prefix, const ct::ScanGeometry& geom, const ct::PostLog& post) {
  write_sinogram(prefix + ".sin", Sinogram{geom.views, geom.detectors, post.sinogram});
  write_weights(prefix + ".wgt", Sinogram{geom.views, geom.detectors, post.weights});
  write_text_file(prefix + ".geom", geometry_to_text(geom));
}

Matrix patches_from_images(const std::vector<Image>& images, int patch_side, int stride) {
  std::vector<Matrix> parts;
  Eigen::Index total = 0;
  for (const auto& img : images) {
    PatchGeometry g{static_cast<int>(img.rows()), static_cast<int>(img.cols()), patch_side, stride};
    parts.push_back(extract_patches(img, g));
    total += parts.back().cols();
  }
  if (parts.empty()) throw ConfigError("no training images");
  Matrix out(patch_side * patch_side, total);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleCols(at, p.cols()) = p;
    at += p.cols();
  }
  return out;
}

std::vector<Image> training_images(const ExperimentConfig& cfg) {
  std::vector<Image> out;
  for (int s = 0; s < cfg.train_slices; ++s) {
    out.push_back(ct::phantom("head", cfg.scan.height, cfg.scan.width, cfg.scan.pixel_mm,
                              cfg.train_phantom_seed + static_cast<std::uint64_t>(s)));
  }
  return out;
}

void write_metrics_csv(const std::vector<MethodMetrics>& metrics, const fs::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << "method,rmse,ssim\n";
  char buf[128];
  for (const auto& m : metrics) {
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g\n", m.method.c_str(), m.rmse, m.ssim);
    os << buf;
  }
  if (!os) throw IoError("write failed: " + path.string());
}

namespace {

void write_ep_trace(const std::vector<double>& objective, const fs::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << "iteration,objective\n";
  char buf[64];
  for (std::size_t i = 0; i < objective.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i + 1, objective[i]);
    os << buf;
  }
}

MethodMetrics measure(const std::string& name, const Image& x, const Image& truth, const Mask& roi) {
  return {name, rmse_roi(x, truth, roi), ssim(x, truth)};
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir, bool verbose) {
  fs::create_directories(out_dir);
  write_text_file(out_dir / "config.resolved", cfg.to_text());
  auto log = [&](const std::string& msg) {
    if (verbose) std::cerr << msg << '\n';
  };

  const auto& geom = cfg.scan;
  const Image truth = ct::phantom(cfg.test_phantom, geom.height, geom.width, geom.pixel_mm, cfg.noise.seed);
  write_image(out_dir / "truth.img", truth);

  log("simulate");
  const ct::ParallelBeamProjector a(geom);
  const auto sim = simulate_scan(a, truth, cfg.noise);
  write_scan_files((out_dir / "scan").string(), geom, sim.post);
  // Everything downstream sees exactly the stored data.
  const Sinogram y = read_sinogram(out_dir / "scan.sin");
  const Sinogram w = read_weights(out_dir / "scan.wgt");

  log("train");
  const auto slices = training_images(cfg);
  for (std::size_t s = 0; s < slices.size(); ++s) {
    write_image(out_dir / ("train_" + std::to_string(s) + ".img"), slices[s]);
  }
  const Matrix patches = patches_from_images(slices, cfg.train.patch_side, cfg.train_stride);
  TrainConfig tc = cfg.train;
  if (verbose && tc.log_every == 0) tc.log_every = 10;
  const auto trained = train(patches, tc);
  save_model(trained.model, out_dir / "model.mcst");
  write_train_trace(trained.trace, out_dir / "train_trace.csv");
  const ModelBundle model = load_model(out_dir / "model.mcst");

  log("fbp");
  const Image x_fbp = ct::fbp(y.data, geom, cfg.fbp);
  write_image(out_dir / "fbp.img", x_fbp);

  const auto scan = ct::make_weighted_scan(a, y.data, w.data);

  log("pwls-ep");
  const auto ep = pwls_ep(a, scan, cfg.ep, x_fbp);
  write_image(out_dir / "ep.img", ep.image);
  write_ep_trace(ep.objective, out_dir / "ep_trace.csv");

  log("pwls-mcst");
  ReconConfig rc = cfg.recon;
  if (verbose && rc.log_every == 0) rc.log_every = 10;
  const auto rec = pwls_mcst(a, scan, model, rc, cfg.recon_init == "ep" ? ep.image : x_fbp);
  write_image(out_dir / "mcst.img", rec.image);
  write_recon_trace(rec.trace, out_dir / "recon_trace.csv");

  const Mask roi = circular_roi(geom.height, geom.width);
  ExperimentResult result;
  result.metrics.push_back(measure("fbp", x_fbp, truth, roi));
  result.metrics.push_back(measure("pwls-ep", ep.image, truth, roi));
  result.metrics.push_back(measure("pwls-mcst", rec.image, truth, roi));
  write_metrics_csv(result.metrics, out_dir / "metrics.csv");
  return result;
}

}  // namespace mcst
