#pragma once

#include <cstdint>

#include "mcst/types.hpp"

namespace mcst {

// Orthonormal 2D DCT-II acting on raster-vectorized sqrt(n) x sqrt(n) patches:
// the Kronecker square of the 1D orthonormal DCT-II matrix.
Matrix dct2_matrix(int n);

// Seeded orthogonal matrix: Householder QR of a standard-normal matrix, with
// column signs chosen so that R has a positive diagonal.
Matrix random_orthogonal(int n, std::uint64_t seed);

// Solution of min_W ||W X - Y||_F s.t. W W^T = I given G = X Y^T = U S V^T:
// W = V U^T. Throws NumericalError on non-finite input.
Matrix procrustes_rotation(const Matrix& g);

}  // namespace mcst
