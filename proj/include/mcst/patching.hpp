#pragma once

#include "mcst/types.hpp"

namespace mcst {

// Placement of square patches on an H x W image. Patches lie fully inside the
// image; top-left corners step by `stride` along both axes.
struct PatchGeometry {
  int image_height = 0;
  int image_width = 0;
  int patch_side = 8;
  int stride = 1;

  // Throws InvalidGeometry unless 1 <= patch_side <= min(H, W) and stride >= 1.
  void validate() const;

  int patches_down() const { return (image_height - patch_side) / stride + 1; }
  int patches_across() const { return (image_width - patch_side) / stride + 1; }
  int count() const { return patches_down() * patches_across(); }
  int dim() const { return patch_side * patch_side; }
};

// Column i is the raster-vectorized patch whose top-left corner is the i-th
// corner in row-major order.
Matrix extract_patches(const Image& image, const PatchGeometry& geom);

// Adjoint of extract_patches: sums every column back into its patch location.
Image aggregate_patches(const Matrix& columns, const PatchGeometry& geom);

// Number of patches covering each pixel.
Eigen::MatrixXi overlap_counts(const PatchGeometry& geom);

}  // namespace mcst
