#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace lcw {

/// Dense row-major matrix of 64-bit floats.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* row_ptr(std::size_t i) { return data_.data() + i * cols_; }
  const double* row_ptr(std::size_t i) const { return data_.data() + i * cols_; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  /// "RxC", used in error messages.
  std::string shape_str() const;

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  bool all_finite() const;
  double frobenius_norm() const;
  Matrix transposed() const;

  void fill(double value);
  void scale(double factor);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Standard matrix product; throws std::invalid_argument naming both shapes
/// when the inner dimensions disagree.
Matrix matmul(const Matrix& a, const Matrix& b);

/// a + b / a - b, elementwise; shapes must agree.
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);

/// Largest absolute entry of a - b; shapes must agree.
double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace lcw
