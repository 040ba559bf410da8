#pragma once

#include "lcwnet/matrix.hpp"

namespace lcw {

struct QrResult {
  Matrix q;  // rows x cols, orthonormal columns
  Matrix r;  // cols x cols, upper triangular, positive diagonal
};

/// Thin QR factorization a = q * r via Householder reflections.
///
/// The sign of each reflector is folded into r so that every diagonal entry
/// of r is strictly positive, which fixes q uniquely for a full-rank input.
/// Requires a.rows() >= a.cols(); throws std::runtime_error when a diagonal
/// of r falls below 1e-12 * ||a||_F (rank deficiency).
QrResult qr_thin(const Matrix& a);

}  // namespace lcw
