#include "lcwnet/conv.hpp"

#include <stdexcept>

namespace lcw {

Conv2dLayer::Conv2dLayer(std::size_t c_out, std::size_t c_in, std::size_t k_h, std::size_t k_w,
                         std::size_t stride, std::size_t padding, WeightMode mode)
    : c_out_(c_out),
      c_in_(c_in),
      k_h_(k_h),
      k_w_(k_w),
      stride_(stride),
      padding_(padding),
      mode_(mode),
      kernels_(c_out, c_in, k_h, k_w),
      grad_kernels_(c_out, c_in, k_h, k_w),
      bias_(c_out, 0.0),
      grad_bias_(c_out, 0.0) {
  if (c_out == 0 || c_in == 0 || k_h == 0 || k_w == 0)
    throw std::invalid_argument("Conv2dLayer: zero-sized kernel configuration");
  if (stride == 0) throw std::invalid_argument("Conv2dLayer: stride must be positive");
  if (mode_ == WeightMode::lcw) {
    auto basis = kernel_basis(c_in, k_h, k_w);
    const std::size_t m = basis->ambient_dim();
    kernel_params_.reserve(c_out);
    grad_v_.reserve(c_out);
    for (std::size_t i = 0; i < c_out; ++i) {
      kernel_params_.emplace_back(basis);
      grad_v_.emplace_back(m - 1, 0.0);
    }
  }
}

std::size_t Conv2dLayer::out_height(std::size_t h) const {
  return (h + 2 * padding_ - k_h_) / stride_ + 1;
}

std::size_t Conv2dLayer::out_width(std::size_t w) const {
  return (w + 2 * padding_ - k_w_) / stride_ + 1;
}

void Conv2dLayer::sync_parameters() {
  if (mode_ != WeightMode::lcw) return;
  const std::size_t len = c_in_ * k_h_ * k_w_;
  for (std::size_t o = 0; o < c_out_; ++o) {
    const auto w = kernel_params_[o].lift();
    double* dst = kernels_.data().data() + o * len;
    for (std::size_t i = 0; i < len; ++i) dst[i] = w[i];
  }
}

std::vector<LcwParam>& Conv2dLayer::kernel_params() {
  if (mode_ != WeightMode::lcw)
    throw std::logic_error("Conv2dLayer: kernel_params only exist in LCW mode");
  return kernel_params_;
}

Tensor4 Conv2dLayer::forward(const Tensor4& x) {
  if (x.c() != c_in_)
    throw std::invalid_argument("conv forward: input " + x.shape_str() + " does not match " +
                                std::to_string(c_in_) + " input channels");
  if (x.h() + 2 * padding_ < k_h_ || x.w() + 2 * padding_ < k_w_)
    throw std::invalid_argument("conv forward: kernel " + kernels_.shape_str() +
                                " larger than padded input " + x.shape_str());
  input_ = x;
  has_input_ = true;

  const std::size_t ho = out_height(x.h());
  const std::size_t wo = out_width(x.w());
  Tensor4 y(x.n(), c_out_, ho, wo);
  for (std::size_t n = 0; n < x.n(); ++n)
    for (std::size_t o = 0; o < c_out_; ++o)
      for (std::size_t i = 0; i < ho; ++i)
        for (std::size_t j = 0; j < wo; ++j) {
          double acc = bias_[o];
          for (std::size_t c = 0; c < c_in_; ++c)
            for (std::size_t ky = 0; ky < k_h_; ++ky) {
              const std::ptrdiff_t yy =
                  static_cast<std::ptrdiff_t>(i * stride_ + ky) -
                  static_cast<std::ptrdiff_t>(padding_);
              if (yy < 0 || yy >= static_cast<std::ptrdiff_t>(x.h())) continue;
              for (std::size_t kx = 0; kx < k_w_; ++kx) {
                const std::ptrdiff_t xx =
                    static_cast<std::ptrdiff_t>(j * stride_ + kx) -
                    static_cast<std::ptrdiff_t>(padding_);
                if (xx < 0 || xx >= static_cast<std::ptrdiff_t>(x.w())) continue;
                acc += kernels_.at(o, c, ky, kx) *
                       x.at(n, c, static_cast<std::size_t>(yy), static_cast<std::size_t>(xx));
              }
            }
          y.at(n, o, i, j) = acc;
        }
  return y;
}

Tensor4 Conv2dLayer::backward(const Tensor4& grad_out) {
  if (!has_input_) throw std::logic_error("conv backward: called before forward");
  const std::size_t ho = out_height(input_.h());
  const std::size_t wo = out_width(input_.w());
  if (grad_out.n() != input_.n() || grad_out.c() != c_out_ || grad_out.h() != ho ||
      grad_out.w() != wo)
    throw std::invalid_argument("conv backward: gradient " + grad_out.shape_str() +
                                " does not match output shape");

  Tensor4 grad_in(input_.n(), c_in_, input_.h(), input_.w());
  Tensor4 local_grad_k(c_out_, c_in_, k_h_, k_w_);
  for (std::size_t n = 0; n < input_.n(); ++n)
    for (std::size_t o = 0; o < c_out_; ++o)
      for (std::size_t i = 0; i < ho; ++i)
        for (std::size_t j = 0; j < wo; ++j) {
          const double g = grad_out.at(n, o, i, j);
          if (g == 0.0) continue;
          grad_bias_[o] += g;
          for (std::size_t c = 0; c < c_in_; ++c)
            for (std::size_t ky = 0; ky < k_h_; ++ky) {
              const std::ptrdiff_t yy =
                  static_cast<std::ptrdiff_t>(i * stride_ + ky) -
                  static_cast<std::ptrdiff_t>(padding_);
              if (yy < 0 || yy >= static_cast<std::ptrdiff_t>(input_.h())) continue;
              for (std::size_t kx = 0; kx < k_w_; ++kx) {
                const std::ptrdiff_t xx =
                    static_cast<std::ptrdiff_t>(j * stride_ + kx) -
                    static_cast<std::ptrdiff_t>(padding_);
                if (xx < 0 || xx >= static_cast<std::ptrdiff_t>(input_.w())) continue;
                const double xv = input_.at(n, c, static_cast<std::size_t>(yy),
                                            static_cast<std::size_t>(xx));
                local_grad_k.at(o, c, ky, kx) += g * xv;
                grad_in.at(n, c, static_cast<std::size_t>(yy), static_cast<std::size_t>(xx)) +=
                    g * kernels_.at(o, c, ky, kx);
              }
            }
        }

  for (std::size_t i = 0; i < grad_kernels_.size(); ++i)
    grad_kernels_.data()[i] += local_grad_k.data()[i];

  if (mode_ == WeightMode::lcw) {
    const std::size_t len = c_in_ * k_h_ * k_w_;
    const LcwBasis& basis = kernel_params_[0].basis();
    for (std::size_t o = 0; o < c_out_; ++o) {
      const auto gv = basis.project(
          std::span<const double>(local_grad_k.data().data() + o * len, len));
      for (std::size_t i = 0; i < len - 1; ++i) grad_v_[o][i] += gv[i];
    }
  }

  return grad_in;
}

std::vector<ParamSlot> Conv2dLayer::params() {
  std::vector<ParamSlot> slots;
  if (mode_ == WeightMode::lcw) {
    for (std::size_t o = 0; o < c_out_; ++o)
      slots.push_back({"v[" + std::to_string(o) + "]", &kernel_params_[o].v(), &grad_v_[o], true});
  } else {
    slots.push_back({"K", &kernels_.data(), &grad_kernels_.data(), true});
  }
  slots.push_back({"b", &bias_, &grad_bias_, false});
  return slots;
}

void Conv2dLayer::zero_grad() {
  for (auto& slot : params())
    for (double& g : *slot.grad) g = 0.0;
  for (double& g : grad_kernels_.data()) g = 0.0;
}

}  // namespace lcw
