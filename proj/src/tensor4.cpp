#include "lcwnet/tensor4.hpp"

#include <cmath>

namespace lcw {

Tensor4::Tensor4(std::size_t n, std::size_t c, std::size_t h, std::size_t w, double fill)
    : dims_{n, c, h, w}, data_(n * c * h * w, fill) {}

std::string Tensor4::shape_str() const {
  return std::to_string(dims_[0]) + "x" + std::to_string(dims_[1]) + "x" +
         std::to_string(dims_[2]) + "x" + std::to_string(dims_[3]);
}

bool Tensor4::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

void Tensor4::fill(double value) {
  for (double& v : data_) v = value;
}

}  // namespace lcw
