#pragma once

#include <vector>

#include "lcwnet/basis.hpp"
#include "lcwnet/layers.hpp"
#include "lcwnet/tensor4.hpp"

namespace lcw {

/// 2-D convolution (cross-correlation) with zero padding and uniform stride.
/// Kernels are (C_out, C_in, K_h, K_w); inputs are (N, C_in, H, W).
///
/// In LCW mode each kernel is realized from a free parameter over the
/// unrolled C_in*K_h*K_w space, so its entries sum to zero; kernel gradients
/// route through B^T exactly as in the dense case.
class Conv2dLayer {
 public:
  Conv2dLayer(std::size_t c_out, std::size_t c_in, std::size_t k_h, std::size_t k_w,
              std::size_t stride, std::size_t padding, WeightMode mode);

  Tensor4 forward(const Tensor4& x);
  Tensor4 backward(const Tensor4& grad_out);

  std::vector<ParamSlot> params();
  void zero_grad();
  void sync_parameters();

  std::size_t c_out() const { return c_out_; }
  std::size_t c_in() const { return c_in_; }
  std::size_t k_h() const { return k_h_; }
  std::size_t k_w() const { return k_w_; }
  WeightMode mode() const { return mode_; }

  Tensor4& kernels() { return kernels_; }
  const Tensor4& kernels() const { return kernels_; }
  std::vector<double>& bias() { return bias_; }
  std::vector<LcwParam>& kernel_params();

 private:
  std::size_t out_height(std::size_t h) const;
  std::size_t out_width(std::size_t w) const;

  std::size_t c_out_, c_in_, k_h_, k_w_, stride_, padding_;
  WeightMode mode_;

  Tensor4 kernels_;       // realized (C_out, C_in, K_h, K_w)
  Tensor4 grad_kernels_;  // same shape
  std::vector<double> bias_;
  std::vector<double> grad_bias_;

  std::vector<LcwParam> kernel_params_;      // lcw mode, one per output channel
  std::vector<std::vector<double>> grad_v_;  // matches kernel_params_

  Tensor4 input_;
  bool has_input_ = false;
};

}  // namespace lcw
