#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "lcwnet/matrix.hpp"

namespace lcw {

/// Orthonormal basis of the zero-sum subspace of R^m (weight vectors whose
/// components sum to zero), stored as the columns of an m x (m-1) matrix.
///
/// Built by thin QR of the stacked matrix [I_{m-1}; -1^T]; the positive-
/// diagonal QR convention makes the basis a pure deterministic function of m.
class LcwBasis {
 public:
  /// Requires m >= 2 (the subspace is trivial for m = 1).
  static LcwBasis build(std::size_t m);

  /// Process-wide cache: one immutable basis per dimension, shared by every
  /// layer of that width.
  static std::shared_ptr<const LcwBasis> shared(std::size_t m);

  std::size_t ambient_dim() const { return m_; }
  const Matrix& matrix() const { return basis_; }

  /// w = B v, length m. Orthonormal columns make this an isometry.
  std::vector<double> lift(std::span<const double> v) const;

  /// v = B^T w, length m - 1. lift(project(w)) removes the mean component.
  std::vector<double> project(std::span<const double> w) const;

 private:
  LcwBasis(std::size_t m, Matrix basis) : m_(m), basis_(std::move(basis)) {}

  std::size_t m_ = 0;
  Matrix basis_;  // m x (m-1)
};

/// Free parameter v paired with the basis that realizes w = B v.
class LcwParam {
 public:
  LcwParam() = default;
  explicit LcwParam(std::shared_ptr<const LcwBasis> basis);
  LcwParam(std::shared_ptr<const LcwBasis> basis, std::vector<double> v);

  /// Imports an unconstrained weight vector: keeps its zero-sum component.
  static LcwParam from_weight(std::shared_ptr<const LcwBasis> basis,
                              std::span<const double> w);

  std::size_t ambient_dim() const { return basis_->ambient_dim(); }
  const LcwBasis& basis() const { return *basis_; }

  std::vector<double>& v() { return v_; }
  const std::vector<double>& v() const { return v_; }

  /// Realized weight w = B v.
  std::vector<double> lift() const { return basis_->lift(v_); }

 private:
  std::shared_ptr<const LcwBasis> basis_;
  std::vector<double> v_;
};

/// Basis over the unrolled kernel space of size c_in * k_h * k_w (>= 2).
std::shared_ptr<const LcwBasis> kernel_basis(std::size_t c_in, std::size_t k_h,
                                             std::size_t k_w);

}  // namespace lcw
