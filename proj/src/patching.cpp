#include "mcst/patching.hpp"

#include <string>

#include "mcst/errors.hpp"

namespace mcst {

void PatchGeometry::validate() const {
  if (patch_side < 1 || stride < 1 || image_height < 1 || image_width < 1) {
    throw InvalidGeometry("patch geometry: sizes and stride must be positive");
  }
  if (patch_side > image_height || patch_side > image_width) {
    throw InvalidGeometry("patch geometry: patch side " + std::to_string(patch_side) +
                          " exceeds image " + std::to_string(image_height) + "x" +
                          std::to_string(image_width));
  }
}

namespace {

void check_image(const Image& image, const PatchGeometry& geom) {
  geom.validate();
  if (image.rows() != geom.image_height || image.cols() != geom.image_width) {
    throw InvalidGeometry("image is " + std::to_string(image.rows()) + "x" +
                          std::to_string(image.cols()) + " but geometry expects " +
                          std::to_string(geom.image_height) + "x" +
                          std::to_string(geom.image_width));
  }
}

}  // namespace

Matrix extract_patches(const Image& image, const PatchGeometry& geom) {
  check_image(image, geom);
  const int p = geom.patch_side;
  const int across = geom.patches_across();
  const int count = geom.count();
  Matrix out(geom.dim(), count);

#pragma omp parallel for schedule(static)
  for (int i = 0; i < count; ++i) {
    const int top = (i / across) * geom.stride;
    const int left = (i % across) * geom.stride;
    double* col = out.col(i).data();
    for (int a = 0; a < p; ++a) {
      for (int b = 0; b < p; ++b) {
        col[a * p + b] = image(top + a, left + b);
      }
    }
  }
  return out;
}

Image aggregate_patches(const Matrix& columns, const PatchGeometry& geom) {
  geom.validate();
  if (columns.rows() != geom.dim() || columns.cols() != geom.count()) {
    throw InvalidGeometry("aggregate_patches: expected " + std::to_string(geom.dim()) + "x" +
                          std::to_string(geom.count()) + " columns, got " +
                          std::to_string(columns.rows()) + "x" +
                          std::to_string(columns.cols()));
  }
  const int p = geom.patch_side;
  const int across = geom.patches_across();
  const int down = geom.patches_down();
  Image out = Image::Zero(geom.image_height, geom.image_width);

  // Parallel over image rows; each row gathers its contributions in patch order,
  // so the result is independent of the worker count.
#pragma omp parallel for schedule(static)
  for (int row = 0; row < geom.image_height; ++row) {
    for (int pr = 0; pr < down; ++pr) {
      const int a = row - pr * geom.stride;
      if (a < 0 || a >= p) continue;
      for (int pc = 0; pc < across; ++pc) {
        const int left = pc * geom.stride;
        const double* col = columns.col(pr * across + pc).data() + a * p;
        for (int b = 0; b < p; ++b) out(row, left + b) += col[b];
      }
    }
  }
  return out;
}

Eigen::MatrixXi overlap_counts(const PatchGeometry& geom) {
  geom.validate();
  auto cover = [&](int patches, int pos) {
    int n = 0;
    for (int k = 0; k < patches; ++k) {
      const int start = k * geom.stride;
      if (pos >= start && pos < start + geom.patch_side) ++n;
    }
    return n;
  };
  Eigen::VectorXi down(geom.image_height), across(geom.image_width);
  for (int r = 0; r < geom.image_height; ++r) down(r) = cover(geom.patches_down(), r);
  for (int c = 0; c < geom.image_width; ++c) across(c) = cover(geom.patches_across(), c);
  return down * across.transpose();
}

}  // namespace mcst
