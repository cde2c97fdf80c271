#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <malloc.h>
#include <optional>
#include <sstream>

#include "mcst/config.hpp"
#include "mcst/errors.hpp"
#include "mcst/fbp.hpp"
#include "mcst/io.hpp"
#include "mcst/metrics.hpp"
#include "mcst/model.hpp"
#include "mcst/parallel.hpp"
#include "mcst/phantom.hpp"
#include "mcst/pipeline.hpp"
#include "mcst/png_export.hpp"
#include "mcst/pwls_ep.hpp"
#include "mcst/pwls_mcst.hpp"
#include "mcst/scan.hpp"
#include "mcst/training.hpp"

using namespace mcst;

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::pair<double, double> parse_window(const std::string& text) {
  const auto v = parse_double_list(text, "--window");
  if (v.size() != 2) throw ConfigError("--window: expected lo,hi");
  return {v[0], v[1]};
}

std::string strip_suffix(const std::string& path) {
  const auto dot = path.find_last_of('.');
  const auto slash = path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path;
  return path.substr(0, dot);
}

struct PhantomArgs {
  std::string name = "shepp-logan";
  int size = 128;
  double pixel_mm = 1.0;
  std::uint64_t seed = 0;
  std::string ellipses;
  std::string out;
};

struct SimulateArgs {
  std::string phantom = "shepp-logan";
  std::string truth;
  int size = 128;
  double pixel_mm = 1.0;
  int views = 180;
  int dets = 0;
  double det_mm = 1.0;
  double attenuation_scale = 2e-5;
  double i0 = 1e4;
  double sigma2 = 25.0;
  std::uint64_t seed = 0;
  std::string out_prefix;
};

struct TrainArgs {
  std::string patches;
  int patch_side = 8;
  int stride = 1;
  int layers = 2;
  std::string clusters = "5,5";
  std::string eta = "80,60";
  int iters = 1000;
  int kmeans_iters = 50;
  std::uint64_t seed = 0;
  int log_every = 0;
  std::string out;
  std::string trace;
};

struct ReconArgs {
  std::string method = "mcst";
  std::string sinogram;
  std::string weights;
  std::string geom;
  std::string model;
  double beta = 9e4;
  std::string gamma = "30,10";
  int outer = 100;
  int inner = 2;
  double alpha = 1.999;
  int stride = 1;
  bool allow_negative = false;
  bool cold_start = false;
  double ep_beta = 1.0;
  double delta = 20.0;
  int ep_iters = 300;
  std::string kappa = "uniform";
  std::string init = "fbp";
  double cutoff = 0.4;
  int log_every = 0;
  std::string out;
  std::string trace;
};

struct EvaluateArgs {
  std::string recon;
  std::string truth;
  std::string metrics = "rmse,ssim";
  bool roi_circle = false;
  std::string out;
};

struct PngArgs {
  std::string in;
  std::string window = "800,1200";
  std::string out;
};

struct ExperimentArgs {
  std::string config;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
};

void run_phantom(const PhantomArgs& p) {
  const std::string text = p.ellipses.empty() ? std::string{} : read_text_file(p.ellipses);
  write_image(p.out, ct::phantom(p.name, p.size, p.size, p.pixel_mm, p.seed, text));
}

void run_simulate(const SimulateArgs& s) {
  ct::ScanGeometry geom;
  Image truth;
  if (!s.truth.empty()) {
    truth = read_image(s.truth);
    if (truth.rows() != truth.cols()) throw InvalidGeometry("simulate: truth image must be square");
    geom.height = geom.width = static_cast<int>(truth.rows());
  } else {
    geom.height = geom.width = s.size;
  }
  geom.pixel_mm = s.pixel_mm;
  geom.views = s.views;
  geom.detector_mm = s.det_mm;
  geom.attenuation_scale = s.attenuation_scale;
  geom.detectors =
      s.dets > 0 ? s.dets
                 : static_cast<int>(std::ceil(std::sqrt(2.0) * geom.height * s.pixel_mm / s.det_mm)) + 3;
  geom.validate();
  if (s.truth.empty()) truth = ct::phantom(s.phantom, geom.height, geom.width, geom.pixel_mm, s.seed);

  ct::NoiseModel noise;
  noise.i0 = s.i0;
  noise.sigma2 = s.sigma2;
  noise.seed = s.seed;
  noise.validate();

  const ct::ParallelBeamProjector a(geom);
  const auto sim = simulate_scan(a, truth, noise);
  write_scan_files(s.out_prefix, geom, sim.post);
  write_image(s.out_prefix + "_truth.img", truth);
}

void run_train(const TrainArgs& t) {
  std::vector<Image> images;
  for (const auto& file : split_list(t.patches)) images.push_back(read_image(file));
  if (images.empty()) throw ConfigError("--patches: no image files given");
  TrainConfig cfg;
  cfg.layers = t.layers;
  cfg.clusters = parse_int_list(t.clusters, "--clusters");
  cfg.eta = parse_double_list(t.eta, "--eta");
  cfg.iterations = t.iters;
  cfg.seed = t.seed;
  cfg.patch_side = t.patch_side;
  cfg.kmeans_iters = t.kmeans_iters;
  cfg.log_every = t.log_every;
  cfg.validate();
  const Matrix patches = patches_from_images(images, t.patch_side, t.stride);
  const auto result = train(patches, cfg);
  save_model(result.model, t.out);
  if (!t.trace.empty()) write_train_trace(result.trace, t.trace);
}

void run_reconstruct(const ReconArgs& r) {
  const std::string geom_path = r.geom.empty() ? strip_suffix(r.sinogram) + ".geom" : r.geom;
  const ct::ScanGeometry geom = geometry_from_text(read_text_file(geom_path));
  const Sinogram y = read_sinogram(r.sinogram);
  const Sinogram w = read_weights(r.weights);
  if (y.views != geom.views || y.detectors != geom.detectors || w.views != y.views || w.detectors != y.detectors) {
    throw InvalidGeometry("reconstruct: sinogram, weights and geometry disagree");
  }

  ct::FbpOptions fo;
  fo.cutoff = r.cutoff;
  const Image x_fbp = ct::fbp(y.data, geom, fo);
  if (r.method == "fbp") {
    write_image(r.out, x_fbp);
    return;
  }

  const ct::ParallelBeamProjector a(geom);
  const auto scan = ct::make_weighted_scan(a, y.data, w.data);
  EpConfig ep_cfg;
  ep_cfg.beta = r.ep_beta;
  ep_cfg.delta = r.delta;
  ep_cfg.iterations = r.ep_iters;
  ep_cfg.alpha = r.alpha;
  ep_cfg.nonnegative = !r.allow_negative;
  ep_cfg.kappa = r.kappa == "statistical" ? KappaMode::kStatistical : KappaMode::kUniform;
  ep_cfg.validate();

  Image x0;
  if (r.init == "fbp") {
    x0 = x_fbp;
  } else if (r.init == "zero") {
    x0 = Image::Zero(geom.height, geom.width);
  } else if (r.init == "ep") {
    if (r.method == "ep") throw ConfigError("reconstruct: --init ep needs --method mcst");
    x0 = pwls_ep(a, scan, ep_cfg, x_fbp).image;
  } else {
    x0 = read_image(r.init);
    if (x0.rows() != geom.height || x0.cols() != geom.width) throw InvalidGeometry("--init image has wrong size");
  }

  if (r.method == "ep") {
    const auto result = pwls_ep(a, scan, ep_cfg, x0);
    write_image(r.out, result.image);
    return;
  }

  if (r.model.empty()) throw ConfigError("reconstruct: --model is required for --method mcst");
  const ModelBundle model = load_model(r.model);
  ReconConfig cfg;
  cfg.beta = r.beta;
  cfg.gamma = parse_double_list(r.gamma, "--gamma");
  cfg.outer = r.outer;
  cfg.inner = r.inner;
  cfg.alpha = r.alpha;
  cfg.stride = r.stride;
  cfg.nonnegative = !r.allow_negative;
  cfg.warm_start = !r.cold_start;
  cfg.log_every = r.log_every;
  cfg.validate(model.layers());
  const auto result = pwls_mcst(a, scan, model, cfg, x0);
  write_image(r.out, result.image);
  if (!r.trace.empty()) write_recon_trace(result.trace, r.trace);
}

void run_evaluate(const EvaluateArgs& e) {
  const Image x = read_image(e.recon);
  const Image truth = read_image(e.truth);
  if (x.rows() != truth.rows() || x.cols() != truth.cols()) throw InvalidGeometry("evaluate: image sizes differ");
  const Mask roi = e.roi_circle ? circular_roi(static_cast<int>(x.rows()), static_cast<int>(x.cols()))
                                : Mask::Constant(x.rows(), x.cols(), true);
  std::ostringstream os;
  os << "metric,value\n";
  char buf[96];
  for (const auto& m : split_list(e.metrics)) {
    double v = 0.0;
    if (m == "rmse") {
      v = rmse_roi(x, truth, roi);
    } else if (m == "ssim") {
      v = ssim(x, truth);
    } else {
      throw ConfigError("--metrics: unknown metric '" + m + "'");
    }
    std::snprintf(buf, sizeof buf, "%s,%.17g\n", m.c_str(), v);
    os << buf;
  }
  if (e.out.empty()) {
    std::cout << os.str();
  } else {
    write_text_file(e.out, os.str());
  }
}

void run_experiment_cmd(const ExperimentArgs& x) {
  ExperimentConfig cfg = ExperimentConfig::load(x.config);
  if (x.seed) {
    cfg.noise.seed = *x.seed;
    cfg.train.seed = *x.seed;
  }
  const auto result = run_experiment(cfg, x.out_dir, x.verbose);
  std::cout << "method,rmse,ssim\n";
  for (const auto& m : result.metrics) std::cout << m.method << ',' << m.rmse << ',' << m.ssim << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  CLI::App app{"Multi-layer clustered sparsifying transform learning and PWLS CT reconstruction"};
  app.require_subcommand(1);
  int workers = 0;
  app.add_option("--workers", workers, "Worker threads for parallel phases (0: library default)")
      ->check(CLI::NonNegativeNumber);

  PhantomArgs pa;
  auto* ph = app.add_subcommand("phantom", "Rasterize a phantom to an MCIMG1 image");
  ph->add_option("--name", pa.name, "shepp-logan, disk, head or ellipses")->capture_default_str();
  ph->add_option("--size", pa.size, "Image side in pixels")->capture_default_str();
  ph->add_option("--pixel-mm", pa.pixel_mm, "Pixel size (mm)")->capture_default_str();
  ph->add_option("--seed", pa.seed, "Seed for the random head phantom")->capture_default_str();
  ph->add_option("--ellipses", pa.ellipses, "Ellipse list file for --name ellipses");
  ph->add_option("--out", pa.out, "Output image")->required();

  SimulateArgs sa;
  auto* si = app.add_subcommand("simulate", "Simulate a noisy parallel-beam scan");
  si->add_option("--phantom", sa.phantom, "Phantom name")->capture_default_str();
  si->add_option("--truth", sa.truth, "Use this image instead of a named phantom");
  si->add_option("--size", sa.size, "Image side in pixels")->capture_default_str();
  si->add_option("--pixel-mm", sa.pixel_mm, "Pixel size (mm)")->capture_default_str();
  si->add_option("--views", sa.views, "Number of views over 180 degrees")->capture_default_str();
  si->add_option("--dets", sa.dets, "Detector bins (0: just cover the image diagonal)")->capture_default_str();
  si->add_option("--det-mm", sa.det_mm, "Detector bin width (mm)")->capture_default_str();
  si->add_option("--attenuation-scale", sa.attenuation_scale, "Attenuation (1/mm) per image unit")
      ->capture_default_str();
  si->add_option("--i0", sa.i0, "Incident photons per ray")->capture_default_str();
  si->add_option("--sigma2", sa.sigma2, "Electronic noise variance")->capture_default_str();
  si->add_option("--seed", sa.seed, "Noise seed")->capture_default_str();
  si->add_option("--out-prefix", sa.out_prefix, "Writes <prefix>.sin/.wgt/.geom and <prefix>_truth.img")
      ->required();

  TrainArgs ta;
  auto* tr = app.add_subcommand("train", "Learn a multi-layer clustered transform model");
  tr->add_option("--patches", ta.patches, "Comma-separated training images")->required();
  tr->add_option("--patch-side", ta.patch_side, "Patch side")->capture_default_str();
  tr->add_option("--stride", ta.stride, "Patch stride")->capture_default_str();
  tr->add_option("--layers", ta.layers, "Number of layers")->capture_default_str();
  tr->add_option("--clusters", ta.clusters, "Clusters per layer, comma-separated")->capture_default_str();
  tr->add_option("--eta", ta.eta, "Thresholds per layer, comma-separated")->capture_default_str();
  tr->add_option("--iters", ta.iters, "Iterations")->capture_default_str();
  tr->add_option("--kmeans-iters", ta.kmeans_iters, "Lloyd iterations for the first layer")->capture_default_str();
  tr->add_option("--seed", ta.seed, "Initialization seed")->capture_default_str();
  tr->add_option("--log-every", ta.log_every, "Progress to stderr every N iterations (0: off)")
      ->capture_default_str();
  tr->add_option("--out", ta.out, "Output model")->required();
  tr->add_option("--trace", ta.trace, "Objective trace CSV");

  ReconArgs ra;
  auto* rc = app.add_subcommand("reconstruct", "Reconstruct an image from a weighted sinogram");
  rc->add_option("--method", ra.method, "mcst, ep or fbp")
      ->check(CLI::IsMember({"mcst", "ep", "fbp"}))
      ->capture_default_str();
  rc->add_option("--sinogram", ra.sinogram, "MCSIN1 sinogram")->required();
  rc->add_option("--weights", ra.weights, "MCWGT1 weights")->required();
  rc->add_option("--geom", ra.geom, "Geometry file (default: sinogram path with .geom)");
  rc->add_option("--model", ra.model, "Model file (mcst)");
  rc->add_option("--beta", ra.beta, "Regularization weight (mcst)")->capture_default_str();
  rc->add_option("--gamma", ra.gamma, "Thresholds per layer (mcst)")->capture_default_str();
  rc->add_option("--outer", ra.outer, "Outer iterations (mcst)")->capture_default_str();
  rc->add_option("--inner", ra.inner, "Image-update iterations per outer iteration (mcst)")->capture_default_str();
  rc->add_option("--stride", ra.stride, "Patch stride (mcst)")->capture_default_str();
  rc->add_option("--alpha", ra.alpha, "Over-relaxation parameter in (1, 2]")->capture_default_str();
  rc->add_flag("--allow-negative", ra.allow_negative, "Skip the nonnegativity projection");
  rc->add_flag("--cold-start", ra.cold_start, "Start from zero codes instead of coding the initial image (mcst)");
  rc->add_option("--ep-beta", ra.ep_beta, "Regularization weight (ep)")->capture_default_str();
  rc->add_option("--delta", ra.delta, "Edge-preserving potential scale (ep)")->capture_default_str();
  rc->add_option("--ep-iters", ra.ep_iters, "Iterations (ep)")->capture_default_str();
  rc->add_option("--kappa", ra.kappa, "uniform or statistical (ep)")
      ->check(CLI::IsMember({"uniform", "statistical"}))
      ->capture_default_str();
  rc->add_option("--init", ra.init, "fbp, zero, ep (a PWLS-EP run with the --ep-* flags) or an image file")->capture_default_str();
  rc->add_option("--cutoff", ra.cutoff, "FBP Hann cutoff as a fraction of Nyquist")->capture_default_str();
  rc->add_option("--log-every", ra.log_every, "Progress to stderr every N outer iterations (0: off)")
      ->capture_default_str();
  rc->add_option("--out", ra.out, "Output image")->required();
  rc->add_option("--trace", ra.trace, "Objective trace CSV (mcst)");

  EvaluateArgs ea;
  auto* ev = app.add_subcommand("evaluate", "Compare a reconstruction against the truth");
  ev->add_option("--recon", ea.recon, "Reconstructed image")->required();
  ev->add_option("--truth", ea.truth, "Reference image")->required();
  ev->add_option("--metrics", ea.metrics, "Comma-separated: rmse, ssim")->capture_default_str();
  ev->add_flag("--roi-circle", ea.roi_circle, "Restrict RMSE to the inscribed circle");
  ev->add_option("--out", ea.out, "CSV output (default: stdout)");

  PngArgs pg;
  auto* ex = app.add_subcommand("export-png", "Write a windowed 8-bit grayscale PNG");
  ex->add_option("--in", pg.in, "Input image")->required();
  ex->add_option("--window", pg.window, "Display window lo,hi")->capture_default_str();
  ex->add_option("--out", pg.out, "Output PNG")->required();

  ExperimentArgs xa;
  std::uint64_t seed_value = 0;
  auto* rx = app.add_subcommand("run-experiment", "Simulate, train, reconstruct and evaluate from one config");
  rx->add_option("--config", xa.config, "Experiment config file")->required();
  rx->add_option("--out-dir", xa.out_dir, "Output directory")->required();
  auto* seed_opt = rx->add_option("--seed", seed_value, "Override the noise and training seeds");
  rx->add_flag("--verbose", xa.verbose, "Progress to stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  if (seed_opt->count() > 0) xa.seed = seed_value;

  try {
    if (workers > 0) set_workers(workers);
    if (ph->parsed()) run_phantom(pa);
    if (si->parsed()) run_simulate(sa);
    if (tr->parsed()) run_train(ta);
    if (rc->parsed()) run_reconstruct(ra);
    if (ev->parsed()) run_evaluate(ea);
    if (ex->parsed()) {
      const auto [lo, hi] = parse_window(pg.window);
      write_png(pg.out, read_image(pg.in), lo, hi);
    }
    if (rx->parsed()) run_experiment_cmd(xa);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
