#include "lcwnet/basis.hpp"

#include <map>
#include <mutex>
#include <stdexcept>

#include "lcwnet/qr.hpp"

namespace lcw {

LcwBasis LcwBasis::build(std::size_t m) {
  if (m < 2) throw std::invalid_argument("LcwBasis: requires m >= 2, got " + std::to_string(m));
  // Columns of [I_{m-1}; -1^T] span the zero-sum subspace; QR orthonormalizes.
  Matrix seed(m, m - 1);
  for (std::size_t j = 0; j < m - 1; ++j) {
    seed(j, j) = 1.0;
    seed(m - 1, j) = -1.0;
  }
  QrResult qr = qr_thin(seed);
  return LcwBasis(m, std::move(qr.q));
}

std::shared_ptr<const LcwBasis> LcwBasis::shared(std::size_t m) {
  static std::mutex mutex;
  static std::map<std::size_t, std::shared_ptr<const LcwBasis>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(m);
  if (it != cache.end()) return it->second;
  auto basis = std::make_shared<const LcwBasis>(build(m));
  cache.emplace(m, basis);
  return basis;
}

std::vector<double> LcwBasis::lift(std::span<const double> v) const {
  if (v.size() != m_ - 1)
    throw std::invalid_argument("lift: expected v of length " + std::to_string(m_ - 1) +
                                ", got " + std::to_string(v.size()));
  std::vector<double> w(m_, 0.0);
  for (std::size_t j = 0; j < m_ - 1; ++j) {
    const double vj = v[j];
    if (vj == 0.0) continue;
    for (std::size_t i = 0; i < m_; ++i) w[i] += basis_(i, j) * vj;
  }
  return w;
}

std::vector<double> LcwBasis::project(std::span<const double> w) const {
  if (w.size() != m_)
    throw std::invalid_argument("project: expected w of length " + std::to_string(m_) +
                                ", got " + std::to_string(w.size()));
  std::vector<double> v(m_ - 1, 0.0);
  for (std::size_t j = 0; j < m_ - 1; ++j) {
    double dot = 0.0;
    for (std::size_t i = 0; i < m_; ++i) dot += basis_(i, j) * w[i];
    v[j] = dot;
  }
  return v;
}

LcwParam::LcwParam(std::shared_ptr<const LcwBasis> basis)
    : basis_(std::move(basis)), v_(basis_->ambient_dim() - 1, 0.0) {}

LcwParam::LcwParam(std::shared_ptr<const LcwBasis> basis, std::vector<double> v)
    : basis_(std::move(basis)), v_(std::move(v)) {
  if (v_.size() != basis_->ambient_dim() - 1)
    throw std::invalid_argument("LcwParam: v length " + std::to_string(v_.size()) +
                                " does not match basis dimension " +
                                std::to_string(basis_->ambient_dim()));
}

LcwParam LcwParam::from_weight(std::shared_ptr<const LcwBasis> basis,
                               std::span<const double> w) {
  auto v = basis->project(w);
  return LcwParam(std::move(basis), std::move(v));
}

std::shared_ptr<const LcwBasis> kernel_basis(std::size_t c_in, std::size_t k_h,
                                             std::size_t k_w) {
  const std::size_t m = c_in * k_h * k_w;
  if (m < 2)
    throw std::invalid_argument("kernel_basis: kernel space must have dimension >= 2, got " +
                                std::to_string(m));
  return LcwBasis::shared(m);
}

}  // namespace lcw
