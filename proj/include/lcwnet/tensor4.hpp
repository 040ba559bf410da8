#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace lcw {

/// Dense 4-D tensor of 64-bit floats, NCHW order, innermost dim contiguous.
class Tensor4 {
 public:
  Tensor4() = default;
  Tensor4(std::size_t n, std::size_t c, std::size_t h, std::size_t w, double fill = 0.0);

  std::size_t n() const { return dims_[0]; }
  std::size_t c() const { return dims_[1]; }
  std::size_t h() const { return dims_[2]; }
  std::size_t w() const { return dims_[3]; }
  std::size_t size() const { return data_.size(); }
  const std::array<std::size_t, 4>& dims() const { return dims_; }

  double& at(std::size_t i, std::size_t j, std::size_t y, std::size_t x) {
    return data_[((i * dims_[1] + j) * dims_[2] + y) * dims_[3] + x];
  }
  double at(std::size_t i, std::size_t j, std::size_t y, std::size_t x) const {
    return data_[((i * dims_[1] + j) * dims_[2] + y) * dims_[3] + x];
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  std::string shape_str() const;
  bool all_finite() const;
  void fill(double value);

 private:
  std::array<std::size_t, 4> dims_{0, 0, 0, 0};
  std::vector<double> data_;
};

}  // namespace lcw
