#include "mcst/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "mcst/errors.hpp"
#include "mcst/kmeans.hpp"
#include "mcst/transforms.hpp"

namespace mcst {

void TrainConfig::validate() const {
  if (layers < 1) throw ConfigError("train: layers must be >= 1");
  if (static_cast<int>(clusters.size()) != layers) {
    throw ConfigError("train: expected " + std::to_string(layers) + " cluster counts");
  }
  if (static_cast<int>(eta.size()) != layers) {
    throw ConfigError("train: expected " + std::to_string(layers) + " thresholds");
  }
  for (int k : clusters) {
    if (k < 1) throw ConfigError("train: cluster counts must be >= 1");
  }
  for (double e : eta) {
    if (!(e >= 0.0)) throw ConfigError("train: thresholds must be nonnegative");
  }
  if (iterations < 1) throw ConfigError("train: iterations must be >= 1");
  if (patch_side < 1) throw ConfigError("train: patch side must be >= 1");
}

const char* to_string(TrainStep step) {
  switch (step) {
    case TrainStep::kInit: return "init";
    case TrainStep::kCluster: return "cluster";
    case TrainStep::kCode: return "code";
    case TrainStep::kTransform: return "transform";
  }
  return "?";
}

double TrainTrace::worst_relative_increase() const {
  double worst = -INFINITY;
  for (std::size_t i = 1; i < entries.size(); ++i) {
    const double prev = entries[i - 1].objective;
    const double rel = (entries[i].objective - prev) / std::max(std::abs(prev), 1e-300);
    worst = std::max(worst, rel);
  }
  return worst;
}

namespace {

// Seed streams for the different random initializations.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (std::uint64_t{words[0]} << 32) | words[1];
}

}  // namespace

TrainResult train(const Matrix& patches, const TrainConfig& cfg) {
  cfg.validate();
  const int n = cfg.patch_side * cfg.patch_side;
  if (patches.rows() != n) {
    throw ConfigError("train: patches have dimension " + std::to_string(patches.rows()) +
                      ", expected " + std::to_string(n));
  }
  const int count = static_cast<int>(patches.cols());

  ModelBundle model;
  model.patch_side = cfg.patch_side;
  model.thresholds = cfg.eta;
  model.transforms.resize(cfg.layers);
  const Matrix dct = dct2_matrix(n);
  for (int l = 0; l < cfg.layers; ++l) {
    for (int k = 0; k < cfg.clusters[l]; ++k) {
      model.transforms[l].push_back(
          l == 0 ? dct : random_orthogonal(n, derive_seed(cfg.seed, 1000 + 100 * l + k)));
    }
  }

  std::vector<Assignment> assignments(cfg.layers);
  assignments[0] = kmeans_init(patches, cfg.clusters[0], derive_seed(cfg.seed, 1), cfg.kmeans_iters);
  std::mt19937_64 rng(derive_seed(cfg.seed, 2));
  for (int l = 1; l < cfg.layers; ++l) {
    std::uniform_int_distribution<int> pick(0, cfg.clusters[l] - 1);
    assignments[l].resize(count);
    for (auto& a : assignments[l]) a = pick(rng);
  }

  TrainResult result;
  result.state = make_state(model, patches, std::move(assignments));
  auto& state = result.state;
  auto& trace = result.trace;
  auto record = [&](int iter, int layer, TrainStep step) {
    trace.entries.push_back({iter, layer, step, training_objective(model, state, cfg.eta),
                             cluster_sizes(model, state, layer)});
  };
  record(0, 0, TrainStep::kInit);

  for (int iter = 1; iter <= cfg.iterations; ++iter) {
    const auto start = std::chrono::steady_clock::now();
    for (int l = 0; l < cfg.layers; ++l) {
      assign_clusters_layer(model, state, l);
      record(iter, l, TrainStep::kCluster);
      sparse_code_layer(model, state, l, cfg.eta[l]);
      record(iter, l, TrainStep::kCode);
      transform_update_layer(model, state, l);
      record(iter, l, TrainStep::kTransform);
    }
    const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
    trace.seconds_per_iteration.push_back(took.count());
    if (cfg.log_every > 0 && (iter % cfg.log_every == 0 || iter == cfg.iterations)) {
      std::fprintf(stderr, "train: iter %d/%d objective %.9e (%.2fs)\n", iter, cfg.iterations,
                   trace.entries.back().objective, took.count());
    }
  }
  model.validate(1e-8);
  result.model = std::move(model);
  return result;
}

void write_train_trace(const TrainTrace& trace, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << "iteration,layer,step,objective,occupancy\n";
  os << std::setprecision(17);
  for (const auto& e : trace.entries) {
    os << e.iteration << ',' << (e.layer + 1) << ',' << to_string(e.step) << ',' << e.objective << ',';
    for (std::size_t k = 0; k < e.occupancy.size(); ++k) os << (k ? ";" : "") << e.occupancy[k];
    os << '\n';
  }
  if (!os) throw IoError("write failed: " + path.string());
}

}  // namespace mcst
