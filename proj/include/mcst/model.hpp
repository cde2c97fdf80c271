#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mcst/types.hpp"

namespace mcst {

// A learned multi-layer clustered transform model. transforms[l][k] is the
// unitary n x n transform of cluster k in layer l (both 0-based).
struct ModelBundle {
  static constexpr std::uint32_t kFormatVersion = 1;

  int patch_side = 8;
  std::vector<std::vector<Matrix>> transforms;
  // Per-layer thresholds: eta during training, gamma when used for reconstruction.
  std::vector<double> thresholds;

  int layers() const { return static_cast<int>(transforms.size()); }
  int clusters(int layer) const { return static_cast<int>(transforms[layer].size()); }
  int dim() const { return patch_side * patch_side; }

  // Throws InvariantError if shapes are inconsistent or any transform deviates
  // from unitarity by more than `tolerance` in Frobenius norm.
  void validate(double tolerance = 1e-8) const;
  // Largest ||W W^T - I||_F over all transforms.
  double max_unitarity_error() const;
};

// Binary model file: "MCST1", u32 version, u32 L, u32 patch_side, u32 K_1..K_L,
// f64 thresholds, then every transform (layer-major, cluster-major, row-major)
// as f64, all little-endian.
void save_model(const ModelBundle& model, const std::filesystem::path& path);
ModelBundle load_model(const std::filesystem::path& path);

}  // namespace mcst
