#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mcst/config.hpp"
#include "mcst/io.hpp"
#include "mcst/projector.hpp"

namespace mcst {

// Noiseless line integrals A x, noisy counts and the post-log data.
struct SimulatedScan {
  Vector line_integrals;
  Vector counts;
  ct::PostLog post;
};

SimulatedScan simulate_scan(const ct::LinearOperator& a, const Image& truth, const ct::NoiseModel& noise);

// Writes <prefix>.sin, <prefix>.wgt and <prefix>.geom.
void write_scan_files(const std::string& prefix, const ct::ScanGeometry& geom, const ct::PostLog& post);

// Columns of every patch of every image, image after image.
Matrix patches_from_images(const std::vector<Image>& images, int patch_side, int stride);

// Randomized head slices used as training data.
std::vector<Image> training_images(const ExperimentConfig& cfg);

struct MethodMetrics {
  std::string method;
  double rmse = 0.0;
  double ssim = 0.0;
};

void write_metrics_csv(const std::vector<MethodMetrics>& metrics, const std::filesystem::path& path);

struct ExperimentResult {
  std::vector<MethodMetrics> metrics;  // fbp, pwls-ep, pwls-mcst
};

// Full chain into `out_dir`: config.resolved, truth.img, train_*.img,
// scan.{sin,wgt,geom}, model.mcst, train_trace.csv, fbp.img, ep.img,
// ep_trace.csv, mcst.img, recon_trace.csv, metrics.csv.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                                bool verbose = false);

}  // namespace mcst
