#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mcst/fbp.hpp"
#include "mcst/noise.hpp"
#include "mcst/projector.hpp"
#include "mcst/pwls_ep.hpp"
#include "mcst/pwls_mcst.hpp"
#include "mcst/training.hpp"

namespace mcst {

// Line-oriented "key = value" text with "[section]" headers and '#' comments.
// Keys are addressed as "section.key". Duplicate keys are rejected.
std::map<std::string, std::string> parse_key_values(const std::string& text);

double parse_double(const std::string& text, const std::string& what);
long long parse_int(const std::string& text, const std::string& what);
bool parse_bool(const std::string& text, const std::string& what);
std::vector<double> parse_double_list(const std::string& text, const std::string& what);
std::vector<int> parse_int_list(const std::string& text, const std::string& what);

// Every knob of a simulate -> train -> reconstruct -> evaluate run.
struct ExperimentConfig {
  ct::ScanGeometry scan;
  ct::NoiseModel noise;
  ct::FbpOptions fbp;

  std::string test_phantom = "shepp-logan";
  int train_slices = 3;
  std::uint64_t train_phantom_seed = 100;
  int train_stride = 1;
  TrainConfig train;

  ReconConfig recon;
  // Starting image for PWLS-MCST: "fbp" or "ep" (the PWLS-EP result).
  std::string recon_init = "fbp";
  EpConfig ep;

  // Throws ConfigError on unknown keys or bad values.
  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& path);
  // Fully resolved configuration in the same text format.
  std::string to_text() const;
};

// Scan geometry sidecar ("[scan]" section only).
std::string geometry_to_text(const ct::ScanGeometry& geom);
ct::ScanGeometry geometry_from_text(const std::string& text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace mcst
