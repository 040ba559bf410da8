#include "lcwnet/qr.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace lcw {

QrResult qr_thin(const Matrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (m < n)
    throw std::invalid_argument("qr_thin: requires rows >= cols, got " + a.shape_str());
  if (n == 0) throw std::invalid_argument("qr_thin: empty matrix");

  const double rank_tol = 1e-12 * a.frobenius_norm();

  Matrix work = a;
  // Householder vectors, one per column; v[k] has length m - k.
  std::vector<std::vector<double>> reflectors(n);

  for (std::size_t k = 0; k < n; ++k) {
    double norm2 = 0.0;
    for (std::size_t i = k; i < m; ++i) norm2 += work(i, k) * work(i, k);
    const double norm = std::sqrt(norm2);
    if (norm <= rank_tol)
      throw std::runtime_error("qr_thin: rank-deficient input, |r_" + std::to_string(k) + "," +
                               std::to_string(k) + "| below 1e-12 * ||a||");

    // Reflect onto -sign(x0) * ||x|| * e1 to avoid cancellation.
    const double alpha = work(k, k) >= 0.0 ? -norm : norm;
    std::vector<double> v(m - k);
    v[0] = work(k, k) - alpha;
    for (std::size_t i = k + 1; i < m; ++i) v[i - k] = work(i, k);
    double vnorm2 = 0.0;
    for (double x : v) vnorm2 += x * x;

    if (vnorm2 > 0.0) {
      for (std::size_t j = k; j < n; ++j) {
        double dot = 0.0;
        for (std::size_t i = k; i < m; ++i) dot += v[i - k] * work(i, j);
        const double f = 2.0 * dot / vnorm2;
        for (std::size_t i = k; i < m; ++i) work(i, j) -= f * v[i - k];
      }
    }
    work(k, k) = alpha;
    for (std::size_t i = k + 1; i < m; ++i) work(i, k) = 0.0;
    reflectors[k] = std::move(v);
  }

  // Accumulate thin Q by applying the reflectors in reverse to the first n
  // columns of the identity.
  Matrix q(m, n);
  for (std::size_t j = 0; j < n; ++j) q(j, j) = 1.0;
  for (std::size_t k = n; k-- > 0;) {
    const auto& v = reflectors[k];
    double vnorm2 = 0.0;
    for (double x : v) vnorm2 += x * x;
    if (vnorm2 == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t i = k; i < m; ++i) dot += v[i - k] * q(i, j);
      const double f = 2.0 * dot / vnorm2;
      for (std::size_t i = k; i < m; ++i) q(i, j) -= f * v[i - k];
    }
  }

  Matrix r(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) r(i, j) = work(i, j);

  // Positive-diagonal convention: flip the sign of any negative r_kk together
  // with the matching column of q.
  for (std::size_t k = 0; k < n; ++k) {
    if (r(k, k) < 0.0) {
      for (std::size_t j = k; j < n; ++j) r(k, j) = -r(k, j);
      for (std::size_t i = 0; i < m; ++i) q(i, k) = -q(i, k);
    }
  }

  return {std::move(q), std::move(r)};
}

}  // namespace lcw
