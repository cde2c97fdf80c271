#include <doctest.h>

#include <random>

#include "mcst/errors.hpp"
#include "mcst/patching.hpp"
#include "support.hpp"

using namespace mcst;

TEST_CASE("patch geometry counts") {
  PatchGeometry g{12, 10, 4, 2};
  g.validate();
  CHECK(g.patches_down() == 5);
  CHECK(g.patches_across() == 4);
  CHECK(g.count() == 20);
  CHECK(g.dim() == 16);
  CHECK_THROWS_AS((PatchGeometry{4, 4, 5, 1}.validate()), InvalidGeometry);
  CHECK_THROWS_AS((PatchGeometry{8, 8, 2, 0}.validate()), InvalidGeometry);
  CHECK_THROWS_AS((PatchGeometry{8, 8, 0, 1}.validate()), InvalidGeometry);
}

TEST_CASE("patch extraction order") {
  Image img(4, 5);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 5; ++c) img(r, c) = 10 * r + c;
  const PatchGeometry g{4, 5, 2, 1};
  const Matrix p = extract_patches(img, g);
  REQUIRE(p.cols() == 12);
  // Second corner is (0, 1); patch pixels in raster order.
  CHECK(p(0, 1) == 1);
  CHECK(p(1, 1) == 2);
  CHECK(p(2, 1) == 11);
  CHECK(p(3, 1) == 12);
  // Corner (1, 0) follows the last corner of the first row.
  CHECK(p(0, 4) == 10);
}

TEST_CASE("aggregation is the adjoint of extraction") {
  std::mt19937_64 rng(3);
  for (int stride : {1, 2, 3}) {
    const PatchGeometry g{11, 9, 3, stride};
    const Image x = testsupport::gaussian(11, 9, rng);
    const Matrix y = testsupport::gaussian(9, g.count(), rng);
    const double lhs = (extract_patches(x, g).array() * y.array()).sum();
    const double rhs = (x.array() * aggregate_patches(y, g).array()).sum();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("overlap counts match aggregated ones") {
  for (int stride : {1, 2, 5}) {
    const PatchGeometry g{13, 16, 4, stride};
    const Image ones = aggregate_patches(Matrix::Ones(16, g.count()), g);
    const Eigen::MatrixXi counts = overlap_counts(g);
    for (int r = 0; r < 13; ++r)
      for (int c = 0; c < 16; ++c) CHECK(counts(r, c) == static_cast<int>(ones(r, c)));
  }
  const Eigen::MatrixXi full = overlap_counts({16, 16, 8, 1});
  CHECK(full(8, 8) == 64);
  CHECK(full(0, 0) == 1);
}
