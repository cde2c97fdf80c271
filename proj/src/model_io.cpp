#include <cmath>
#include <fstream>
#include <string>

#include "mcst/errors.hpp"
#include "mcst/io.hpp"
#include "mcst/model.hpp"

namespace mcst {

double ModelBundle::max_unitarity_error() const {
  double worst = 0.0;
  for (const auto& bank : transforms) {
    for (const auto& w : bank) {
      const double err = (w * w.transpose() - Matrix::Identity(w.rows(), w.cols())).norm();
      worst = std::max(worst, std::isfinite(err) ? err : INFINITY);
    }
  }
  return worst;
}

void ModelBundle::validate(double tolerance) const {
  if (patch_side < 1) throw InvariantError("model: patch side must be positive");
  if (transforms.empty()) throw InvariantError("model: no layers");
  if (thresholds.size() != transforms.size()) {
    throw InvariantError("model: expected one threshold per layer");
  }
  for (std::size_t l = 0; l < transforms.size(); ++l) {
    if (transforms[l].empty()) {
      throw InvariantError("model: layer " + std::to_string(l + 1) + " has no clusters");
    }
    if (!(thresholds[l] >= 0.0)) throw InvariantError("model: thresholds must be nonnegative");
    for (const auto& w : transforms[l]) {
      if (w.rows() != dim() || w.cols() != dim()) {
        throw InvariantError("model: transform shape does not match patch size");
      }
    }
  }
  const double err = max_unitarity_error();
  if (!(err <= tolerance)) {
    throw InvariantError("model: transform is not unitary (||WW^T - I||_F = " +
                         std::to_string(err) + ")");
  }
}

void save_model(const ModelBundle& model, const std::filesystem::path& path) {
  model.validate();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  le::put_magic(os, "MCST1");
  le::put_u32(os, ModelBundle::kFormatVersion);
  le::put_u32(os, static_cast<std::uint32_t>(model.layers()));
  le::put_u32(os, static_cast<std::uint32_t>(model.patch_side));
  for (int l = 0; l < model.layers(); ++l) le::put_u32(os, static_cast<std::uint32_t>(model.clusters(l)));
  for (double t : model.thresholds) le::put_f64(os, t);
  for (const auto& bank : model.transforms) {
    for (const auto& w : bank) {
      for (Eigen::Index r = 0; r < w.rows(); ++r) {
        for (Eigen::Index c = 0; c < w.cols(); ++c) le::put_f64(os, w(r, c));
      }
    }
  }
  os.flush();
  if (!os) throw IoError("write failed: " + path.string());
}

ModelBundle load_model(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  le::expect_magic(is, "MCST1", path.string());
  const auto version = le::get_u32(is);
  if (version != ModelBundle::kFormatVersion) {
    throw FormatError(path.string() + ": unsupported model version " + std::to_string(version));
  }
  const auto layers = le::get_u32(is);
  const auto side = le::get_u32(is);
  if (layers == 0 || layers > 64 || side == 0 || side > 64) {
    throw FormatError(path.string() + ": implausible model header");
  }
  ModelBundle model;
  model.patch_side = static_cast<int>(side);
  std::vector<std::uint32_t> clusters(layers);
  for (auto& k : clusters) {
    k = le::get_u32(is);
    if (k == 0 || k > 4096) throw FormatError(path.string() + ": implausible cluster count");
  }
  model.thresholds.resize(layers);
  for (auto& t : model.thresholds) t = le::get_f64(is);
  const int n = model.dim();
  model.transforms.resize(layers);
  for (std::uint32_t l = 0; l < layers; ++l) {
    model.transforms[l].assign(clusters[l], Matrix(n, n));
    for (auto& w : model.transforms[l]) {
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) w(r, c) = le::get_f64(is);
      }
    }
  }
  if (is.peek() != std::ifstream::traits_type::eof()) {
    throw FormatError(path.string() + ": trailing bytes after model payload");
  }
  model.validate();
  return model;
}

}  // namespace mcst
