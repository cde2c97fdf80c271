#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mcst/model.hpp"
#include "mcst/mcst_core.hpp"
#include "mcst/types.hpp"

namespace mcst {

struct TrainConfig {
  int layers = 2;
  std::vector<int> clusters{5, 5};
  std::vector<double> eta{80.0, 60.0};
  int iterations = 1000;
  std::uint64_t seed = 0;
  int patch_side = 8;
  int kmeans_iters = 50;
  // Progress line to stderr every `log_every` iterations; 0 disables.
  int log_every = 0;

  // Throws ConfigError on inconsistent settings.
  void validate() const;
};

enum class TrainStep { kInit, kCluster, kCode, kTransform };

const char* to_string(TrainStep step);

struct TraceEntry {
  int iteration = 0;  // 0 for the initial state
  int layer = 0;      // 0-based; 0 for the initial state
  TrainStep step = TrainStep::kInit;
  double objective = 0.0;
  std::vector<int> occupancy;  // cluster sizes of `layer` after the step
};

struct TrainTrace {
  std::vector<TraceEntry> entries;
  std::vector<double> seconds_per_iteration;

  // Largest relative increase between consecutive objective values (<= 0 for a
  // monotone trace).
  double worst_relative_increase() const;
};

struct TrainResult {
  ModelBundle model;
  TrainTrace trace;
  McstState state;
};

// Block coordinate descent over (clusters, codes, transforms), layer by layer.
// Initialization: zero codes, DCT transforms in the first layer (shared by all
// of its clusters), seeded random orthogonal transforms deeper, k-means
// clusters in the first layer and uniformly random clusters deeper.
TrainResult train(const Matrix& patches, const TrainConfig& cfg);

// CSV with header "iteration,layer,step,objective,occupancy"; layers are
// written 1-based and occupancy as ';'-separated cluster sizes. Timing is not
// written so that reruns produce identical files.
void write_train_trace(const TrainTrace& trace, const std::filesystem::path& path);

}  // namespace mcst
