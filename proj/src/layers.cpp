#include "lcwnet/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace lcw {

// ---------------------------------------------------------------------------
// DenseLayer

DenseLayer::DenseLayer(std::size_t in_features, std::size_t out_features, WeightMode mode)
    : in_(in_features),
      out_(out_features),
      mode_(mode),
      weights_(out_features, in_features),
      grad_weights_(out_features, in_features),
      bias_(out_features, 0.0),
      grad_bias_(out_features, 0.0) {
  if (in_ == 0 || out_ == 0) throw std::invalid_argument("DenseLayer: zero-sized layer");
  if (mode_ == WeightMode::lcw) {
    auto basis = LcwBasis::shared(in_);
    neuron_params_.reserve(out_);
    grad_v_.reserve(out_);
    for (std::size_t i = 0; i < out_; ++i) {
      neuron_params_.emplace_back(basis);
      grad_v_.emplace_back(in_ - 1, 0.0);
    }
  }
}

void DenseLayer::sync_parameters() {
  if (mode_ != WeightMode::lcw) return;
  for (std::size_t i = 0; i < out_; ++i) {
    const auto w = neuron_params_[i].lift();
    double* row = weights_.row_ptr(i);
    for (std::size_t j = 0; j < in_; ++j) row[j] = w[j];
  }
}

Matrix& DenseLayer::weights_mutable() {
  if (mode_ == WeightMode::lcw)
    throw std::logic_error("DenseLayer: weights of an LCW layer are derived from v");
  return weights_;
}

std::vector<LcwParam>& DenseLayer::neuron_params() {
  if (mode_ != WeightMode::lcw)
    throw std::logic_error("DenseLayer: neuron_params only exist in LCW mode");
  return neuron_params_;
}

Matrix DenseLayer::forward(const Matrix& x) {
  if (x.rows() != in_)
    throw std::invalid_argument("dense forward: input " + x.shape_str() + " does not match " +
                                std::to_string(in_) + " input features");
  input_ = x;
  has_input_ = true;
  Matrix z = matmul(weights_, x);
  for (std::size_t i = 0; i < out_; ++i) {
    double* zi = z.row_ptr(i);
    const double b = bias_[i];
    for (std::size_t j = 0; j < z.cols(); ++j) zi[j] += b;
  }
  return z;
}

Matrix DenseLayer::infer(const Matrix& x) const {
  if (x.rows() != in_)
    throw std::invalid_argument("dense infer: input " + x.shape_str() + " does not match " +
                                std::to_string(in_) + " input features");
  Matrix z = matmul(weights_, x);
  for (std::size_t i = 0; i < out_; ++i) {
    double* zi = z.row_ptr(i);
    const double b = bias_[i];
    for (std::size_t j = 0; j < z.cols(); ++j) zi[j] += b;
  }
  return z;
}

Matrix DenseLayer::backward(const Matrix& grad_out) {
  if (!has_input_) throw std::logic_error("dense backward: called before forward");
  if (grad_out.rows() != out_ || grad_out.cols() != input_.cols())
    throw std::invalid_argument("dense backward: gradient " + grad_out.shape_str() +
                                " does not match output " + std::to_string(out_) + "x" +
                                std::to_string(input_.cols()));

  // grad_W = grad_z a^T, grad_b = row sums of grad_z.
  const Matrix local_grad_w = matmul(grad_out, input_.transposed());
  for (std::size_t i = 0; i < grad_weights_.size(); ++i)
    grad_weights_.data()[i] += local_grad_w.data()[i];
  for (std::size_t i = 0; i < out_; ++i) {
    const double* gi = grad_out.row_ptr(i);
    double s = 0.0;
    for (std::size_t j = 0; j < grad_out.cols(); ++j) s += gi[j];
    grad_bias_[i] += s;
  }

  if (mode_ == WeightMode::lcw) {
    // Chain rule through the fixed basis: grad_v = B^T grad_w per neuron.
    const LcwBasis& basis = neuron_params_[0].basis();
    for (std::size_t i = 0; i < out_; ++i) {
      const auto gv = basis.project(
          std::span<const double>(local_grad_w.row_ptr(i), in_));
      for (std::size_t j = 0; j < in_ - 1; ++j) grad_v_[i][j] += gv[j];
    }
  }

  return matmul(weights_.transposed(), grad_out);
}

std::vector<ParamSlot> DenseLayer::params() {
  std::vector<ParamSlot> slots;
  if (mode_ == WeightMode::lcw) {
    for (std::size_t i = 0; i < out_; ++i)
      slots.push_back({"v[" + std::to_string(i) + "]", &neuron_params_[i].v(), &grad_v_[i], true});
  } else {
    slots.push_back({"W", &weights_.data(), &grad_weights_.data(), true});
  }
  slots.push_back({"b", &bias_, &grad_bias_, false});
  return slots;
}

// ---------------------------------------------------------------------------
// ActivationLayer

double sigmoid_scalar(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Matrix ActivationLayer::forward(const Matrix& x) {
  preact_ = x;
  has_input_ = true;
  return infer(x);
}

Matrix ActivationLayer::infer(const Matrix& x) const {
  Matrix a = x;
  if (kind_ == Activation::sigmoid) {
    for (double& v : a.data()) v = sigmoid_scalar(v);
  } else {
    for (double& v : a.data()) v = v > 0.0 ? v : 0.0;
  }
  return a;
}

Matrix ActivationLayer::backward(const Matrix& grad_out) {
  if (!has_input_) throw std::logic_error("activation backward: called before forward");
  if (!grad_out.same_shape(preact_))
    throw std::invalid_argument("activation backward: gradient " + grad_out.shape_str() +
                                " does not match cached input " + preact_.shape_str());
  Matrix grad_in = grad_out;
  if (kind_ == Activation::sigmoid) {
    for (std::size_t i = 0; i < grad_in.size(); ++i) {
      const double s = sigmoid_scalar(preact_.data()[i]);
      grad_in.data()[i] *= s * (1.0 - s);
    }
  } else {
    for (std::size_t i = 0; i < grad_in.size(); ++i)
      if (preact_.data()[i] <= 0.0) grad_in.data()[i] = 0.0;
  }
  return grad_in;
}

// ---------------------------------------------------------------------------
// BatchNormLayer

BatchNormLayer::BatchNormLayer(std::size_t features, double epsilon, double momentum)
    : features_(features),
      epsilon_(epsilon),
      momentum_(momentum),
      gamma_(features, 1.0),
      beta_(features, 0.0),
      grad_gamma_(features, 0.0),
      grad_beta_(features, 0.0),
      running_mean_(features, 0.0),
      running_var_(features, 1.0) {
  if (features_ == 0) throw std::invalid_argument("BatchNormLayer: zero features");
  if (epsilon_ < 0.0) throw std::invalid_argument("BatchNormLayer: negative epsilon");
}

Matrix BatchNormLayer::forward(const Matrix& x) {
  if (x.rows() != features_)
    throw std::invalid_argument("batchnorm forward: input " + x.shape_str() +
                                " does not match " + std::to_string(features_) + " features");
  if (!training_) {
    has_input_ = true;
    forward_was_training_ = false;
    return infer(x);
  }
  const std::size_t batch = x.cols();
  if (batch < 2)
    throw std::invalid_argument("batchnorm forward: training mode needs a batch of >= 2, got " +
                                std::to_string(batch));

  xhat_ = Matrix(features_, batch);
  inv_std_.assign(features_, 0.0);
  Matrix y(features_, batch);
  for (std::size_t f = 0; f < features_; ++f) {
    const double* xf = x.row_ptr(f);
    double mean = 0.0;
    for (std::size_t j = 0; j < batch; ++j) mean += xf[j];
    mean /= static_cast<double>(batch);
    double var = 0.0;
    for (std::size_t j = 0; j < batch; ++j) var += (xf[j] - mean) * (xf[j] - mean);
    var /= static_cast<double>(batch);

    running_mean_[f] = (1.0 - momentum_) * running_mean_[f] + momentum_ * mean;
    running_var_[f] = (1.0 - momentum_) * running_var_[f] + momentum_ * var;

    const double inv = 1.0 / std::sqrt(var + epsilon_);
    inv_std_[f] = inv;
    double* xh = xhat_.row_ptr(f);
    double* yf = y.row_ptr(f);
    for (std::size_t j = 0; j < batch; ++j) {
      xh[j] = (xf[j] - mean) * inv;
      yf[j] = gamma_[f] * xh[j] + beta_[f];
    }
  }
  has_input_ = true;
  forward_was_training_ = true;
  return y;
}

Matrix BatchNormLayer::infer(const Matrix& x) const {
  if (x.rows() != features_)
    throw std::invalid_argument("batchnorm infer: input " + x.shape_str() +
                                " does not match " + std::to_string(features_) + " features");
  Matrix y(features_, x.cols());
  for (std::size_t f = 0; f < features_; ++f) {
    const double inv = 1.0 / std::sqrt(running_var_[f] + epsilon_);
    const double* xf = x.row_ptr(f);
    double* yf = y.row_ptr(f);
    for (std::size_t j = 0; j < x.cols(); ++j)
      yf[j] = gamma_[f] * (xf[j] - running_mean_[f]) * inv + beta_[f];
  }
  return y;
}

Matrix BatchNormLayer::backward(const Matrix& grad_out) {
  if (!has_input_) throw std::logic_error("batchnorm backward: called before forward");
  if (!forward_was_training_) {
    // Eval-mode forward is a fixed affine map per feature.
    Matrix grad_in = grad_out;
    for (std::size_t f = 0; f < features_; ++f) {
      const double k = gamma_[f] / std::sqrt(running_var_[f] + epsilon_);
      double* gf = grad_in.row_ptr(f);
      for (std::size_t j = 0; j < grad_in.cols(); ++j) gf[j] *= k;
    }
    return grad_in;
  }
  if (!grad_out.same_shape(xhat_))
    throw std::invalid_argument("batchnorm backward: gradient " + grad_out.shape_str() +
                                " does not match cached batch " + xhat_.shape_str());

  const std::size_t batch = grad_out.cols();
  const double inv_b = 1.0 / static_cast<double>(batch);
  Matrix grad_in(features_, batch);
  for (std::size_t f = 0; f < features_; ++f) {
    const double* g = grad_out.row_ptr(f);
    const double* xh = xhat_.row_ptr(f);
    double sum_g = 0.0, sum_gx = 0.0;
    for (std::size_t j = 0; j < batch; ++j) {
      sum_g += g[j];
      sum_gx += g[j] * xh[j];
    }
    grad_gamma_[f] += sum_gx;
    grad_beta_[f] += sum_g;

    const double k = gamma_[f] * inv_std_[f];
    const double mean_g = sum_g * inv_b;
    const double mean_gx = sum_gx * inv_b;
    double* gi = grad_in.row_ptr(f);
    for (std::size_t j = 0; j < batch; ++j)
      gi[j] = k * (g[j] - mean_g - xh[j] * mean_gx);
  }
  return grad_in;
}

std::vector<ParamSlot> BatchNormLayer::params() {
  return {{"gamma", &gamma_, &grad_gamma_, false}, {"beta", &beta_, &grad_beta_, false}};
}

}  // namespace lcw
