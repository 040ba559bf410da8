#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "lcwnet/matrix.hpp"
#include "lcwnet/qr.hpp"
#include "lcwnet/rng.hpp"
#include "lcwnet/stats.hpp"

using namespace lcw;

namespace {

// Independent oracle: naive triple loop.
Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

double fro_diff(const Matrix& a, const Matrix& b) { return sub(a, b).frobenius_norm(); }

}  // namespace

TEST_CASE("matmul identity") {
  Rng rng(7);
  const Matrix m = rand_uniform(rng, -1.0, 1.0, 3, 3);
  CHECK(max_abs_diff(matmul(Matrix::identity(3), m), m) == 0.0);
}

TEST_CASE("matmul hand dot product") {
  const Matrix a = Matrix::from_rows({{1.0, 2.0}});
  const Matrix b = Matrix::from_rows({{3.0}, {4.0}});
  const Matrix c = matmul(a, b);
  CHECK(c.rows() == 1);
  CHECK(c.cols() == 1);
  CHECK(c(0, 0) == doctest::Approx(11.0).epsilon(1e-15));
}

TEST_CASE("matmul matches naive oracle") {
  Rng rng(11);
  const Matrix a = rand_uniform(rng, -2.0, 2.0, 5, 4);
  const Matrix b = rand_uniform(rng, -2.0, 2.0, 4, 3);
  CHECK(max_abs_diff(matmul(a, b), naive_matmul(a, b)) < 1e-12);
}

TEST_CASE("matmul dimension mismatch names both shapes") {
  const Matrix a(2, 3);
  const Matrix b(4, 2);
  CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("2x3"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("4x2"), std::invalid_argument);
}

TEST_CASE("matmul associativity on random triples") {
  Rng rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix a = rand_uniform(rng, -1.0, 1.0, 6, 5);
    const Matrix b = rand_uniform(rng, -1.0, 1.0, 5, 7);
    const Matrix c = rand_uniform(rng, -1.0, 1.0, 7, 4);
    const Matrix left = matmul(matmul(a, b), c);
    const Matrix right = matmul(a, matmul(b, c));
    CHECK(fro_diff(left, right) / left.frobenius_norm() < 1e-9);
  }
}

TEST_CASE("qr identity") {
  const auto res = qr_thin(Matrix::identity(4));
  CHECK(max_abs_diff(res.q, Matrix::identity(4)) < 1e-15);
  CHECK(max_abs_diff(res.r, Matrix::identity(4)) < 1e-15);
}

TEST_CASE("qr of [[1],[-1]] forced by positive-diagonal convention") {
  const Matrix a = Matrix::from_rows({{1.0}, {-1.0}});
  const auto res = qr_thin(a);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(res.q(0, 0) == doctest::Approx(inv_sqrt2).epsilon(1e-14));
  CHECK(res.q(1, 0) == doctest::Approx(-inv_sqrt2).epsilon(1e-14));
  CHECK(res.r(0, 0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("qr random 8x5 reconstruction and orthonormality") {
  Rng rng(17);
  const Matrix a = rand_uniform(rng, -1.0, 1.0, 8, 5);
  const auto res = qr_thin(a);
  CHECK(fro_diff(matmul(res.q, res.r), a) / a.frobenius_norm() < 1e-10);
  CHECK(fro_diff(matmul(res.q.transposed(), res.q), Matrix::identity(5)) < 1e-10);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(res.r(i, i) > 0.0);
    for (std::size_t j = 0; j < i; ++j) CHECK(res.r(i, j) == 0.0);
  }
}

TEST_CASE("qr property over random sizes up to 512") {
  Rng rng(19);
  const std::size_t shapes[][2] = {{2, 2}, {16, 3}, {64, 64}, {128, 40}, {512, 31}};
  for (const auto& shape : shapes) {
    const Matrix a = rand_uniform(rng, -1.0, 1.0, shape[0], shape[1]);
    const auto res = qr_thin(a);
    CHECK(fro_diff(matmul(res.q, res.r), a) / a.frobenius_norm() < 1e-10);
    CHECK(fro_diff(matmul(res.q.transposed(), res.q), Matrix::identity(shape[1])) < 1e-10);
  }
}

TEST_CASE("qr rejects rank-deficient input") {
  Matrix a(4, 2);
  for (std::size_t i = 0; i < 4; ++i) {
    a(i, 0) = static_cast<double>(i + 1);
    a(i, 1) = 2.0 * static_cast<double>(i + 1);  // second column is dependent
  }
  CHECK_THROWS_AS(qr_thin(a), std::runtime_error);
}

TEST_CASE("qr rejects wide input") {
  CHECK_THROWS_AS(qr_thin(Matrix(2, 5)), std::invalid_argument);
}

TEST_CASE("summarize single sample") {
  const double xs[] = {5.0};
  const auto st = summarize(xs);
  CHECK(st.mean == 5.0);
  CHECK(st.variance == 0.0);
  for (double q : st.quantiles()) CHECK(q == 5.0);
}

TEST_CASE("summarize hand computation") {
  const double xs[] = {1.0, 2.0, 3.0};
  const auto st = summarize(xs);
  CHECK(st.mean == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(st.variance == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(st.q50 == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(st.q25 == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("summarize rejects empty input") {
  CHECK_THROWS_AS(summarize(std::span<const double>()), std::invalid_argument);
}

TEST_CASE("summarize seeded uniform moments") {
  Rng rng(23);
  const Matrix m = rand_uniform(rng, 0.0, 1.0, 1, 100000);
  const auto st = summarize(m.data());
  CHECK(std::fabs(st.mean - 0.5) < 0.01);
  CHECK(std::fabs(st.variance - 1.0 / 12.0) < 0.01);
}

TEST_CASE("quantile monotonicity on arbitrary samples") {
  Rng rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.below(200);
    Matrix m = rand_normal(rng, 0.0, 3.0, 1, n);
    const auto st = summarize(m.data());
    const auto q = st.quantiles();
    for (std::size_t i = 1; i < q.size(); ++i) CHECK(q[i] >= q[i - 1]);
    CHECK(st.variance >= 0.0);
  }
}

TEST_CASE("rng determinism") {
  Rng a(12345);
  Rng b(12345);
  const Matrix ma = rand_uniform(a, -1.0, 1.0, 10, 10);
  const Matrix mb = rand_uniform(b, -1.0, 1.0, 10, 10);
  CHECK(ma.data() == mb.data());

  Rng c(12345);
  Rng d(12345);
  const Matrix nc = rand_normal(c, 0.0, 1.0, 10, 10);
  const Matrix nd = rand_normal(d, 0.0, 1.0, 10, 10);
  CHECK(nc.data() == nd.data());
}

TEST_CASE("rng uniform moments") {
  Rng rng(31);
  const Matrix m = rand_uniform(rng, 0.0, 1.0, 1, 100000);
  CHECK(std::fabs(mean_of(m.data()) - 0.5) < 0.01);
}

TEST_CASE("rng normal moments") {
  Rng rng(37);
  const Matrix m = rand_normal(rng, 0.0, 1.0, 1, 100000);
  CHECK(std::fabs(variance_of(m.data()) - 1.0) < 0.02);
}

TEST_CASE("rng rejects invalid parameters") {
  Rng rng(1);
  CHECK_THROWS_AS(rand_uniform(rng, 1.0, 1.0, 2, 2), std::invalid_argument);
  CHECK_THROWS_AS(rand_normal(rng, 0.0, 0.0, 2, 2), std::invalid_argument);
  CHECK_THROWS_AS(rng.uniform(2.0, -1.0), std::invalid_argument);
}
