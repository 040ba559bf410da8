#pragma once

#include <memory>
#include <string>
#include <vector>

#include "lcwnet/basis.hpp"
#include "lcwnet/matrix.hpp"

namespace lcw {

enum class WeightMode { standard, lcw };
enum class Activation { sigmoid, relu };

/// One trainable buffer and its gradient. The trainer owns the update rule;
/// `decay` marks buffers that take weight decay (weights yes, biases and
/// batch-norm parameters no).
struct ParamSlot {
  std::string name;
  std::vector<double>* value = nullptr;
  std::vector<double>* grad = nullptr;
  bool decay = false;
};

/// A layer in the matrix world: columns are samples.
///
/// forward() caches whatever backward() needs; backward() accumulates into the
/// gradient buffers (zeroing is the trainer's job) and returns the gradient
/// with respect to the layer input. infer() is the stateless evaluation path:
/// it never writes to the layer, so it is safe to call concurrently.
class Layer {
 public:
  virtual ~Layer() = default;

  virtual Matrix forward(const Matrix& x) = 0;
  virtual Matrix backward(const Matrix& grad_out) = 0;
  virtual Matrix infer(const Matrix& x) const = 0;

  virtual std::vector<ParamSlot> params() { return {}; }
  virtual std::string kind() const = 0;

  /// Re-derives any internal caches from the trainable buffers (LCW layers
  /// re-lift their realized weights). Called after parameter updates.
  virtual void sync_parameters() {}

  virtual void set_training(bool) {}

  void zero_grad() {
    for (auto& slot : params())
      for (double& g : *slot.grad) g = 0.0;
  }
};

/// Fully connected layer z = W a + b. In LCW mode every row of W is realized
/// from a free parameter per neuron, w_i = B v_i, so each row sums to zero;
/// only v and b are trained and gradients route through B^T.
class DenseLayer final : public Layer {
 public:
  DenseLayer(std::size_t in_features, std::size_t out_features, WeightMode mode);

  Matrix forward(const Matrix& x) override;
  Matrix backward(const Matrix& grad_out) override;
  Matrix infer(const Matrix& x) const override;
  std::vector<ParamSlot> params() override;
  std::string kind() const override { return "dense"; }
  void sync_parameters() override;

  std::size_t in_features() const { return in_; }
  std::size_t out_features() const { return out_; }
  WeightMode mode() const { return mode_; }

  /// Realized weight matrix (out x in); in LCW mode the lifted rows.
  const Matrix& weights() const { return weights_; }
  Matrix& weights_mutable();
  const Matrix& weight_grad() const { return grad_weights_; }

  std::vector<double>& bias() { return bias_; }
  const std::vector<double>& bias() const { return bias_; }

  std::vector<LcwParam>& neuron_params();
  std::vector<std::vector<double>>& v_grads() { return grad_v_; }

 private:
  std::size_t in_ = 0;
  std::size_t out_ = 0;
  WeightMode mode_ = WeightMode::standard;

  Matrix weights_;       // out x in, realized
  Matrix grad_weights_;  // out x in
  std::vector<double> bias_;
  std::vector<double> grad_bias_;

  std::vector<LcwParam> neuron_params_;       // lcw mode, one per neuron
  std::vector<std::vector<double>> grad_v_;   // lcw mode, matches neuron_params_

  Matrix input_;  // cached a^{l-1}
  bool has_input_ = false;
};

/// Elementwise nonlinearity. Sigmoid uses the sign-split form so exp never
/// overflows; ReLU uses f'(0) = 0.
class ActivationLayer final : public Layer {
 public:
  explicit ActivationLayer(Activation kind) : kind_(kind) {}

  Matrix forward(const Matrix& x) override;
  Matrix backward(const Matrix& grad_out) override;
  Matrix infer(const Matrix& x) const override;
  std::string kind() const override { return kind_ == Activation::sigmoid ? "sigmoid" : "relu"; }

  Activation activation() const { return kind_; }

 private:
  Activation kind_;
  Matrix preact_;  // cached z
  bool has_input_ = false;
};

double sigmoid_scalar(double x);

/// Per-feature batch normalization over the sample (column) dimension.
/// Training mode uses batch statistics (population variance) and updates the
/// running estimates by exponential moving average; eval mode depends only on
/// the stored statistics. backward() is the exact batch-coupled gradient.
class BatchNormLayer final : public Layer {
 public:
  explicit BatchNormLayer(std::size_t features, double epsilon = 1e-5, double momentum = 0.1);

  Matrix forward(const Matrix& x) override;
  Matrix backward(const Matrix& grad_out) override;
  Matrix infer(const Matrix& x) const override;
  std::vector<ParamSlot> params() override;
  std::string kind() const override { return "batchnorm"; }
  void set_training(bool training) override { training_ = training; }

  std::size_t features() const { return features_; }
  double epsilon() const { return epsilon_; }
  double momentum() const { return momentum_; }
  bool training() const { return training_; }

  std::vector<double>& gamma() { return gamma_; }
  std::vector<double>& beta() { return beta_; }
  std::vector<double>& running_mean() { return running_mean_; }
  std::vector<double>& running_var() { return running_var_; }

 private:
  std::size_t features_ = 0;
  double epsilon_ = 1e-5;
  double momentum_ = 0.1;
  bool training_ = true;

  std::vector<double> gamma_, beta_;
  std::vector<double> grad_gamma_, grad_beta_;
  std::vector<double> running_mean_, running_var_;

  // caches from the last training-mode forward
  Matrix xhat_;
  std::vector<double> inv_std_;
  bool forward_was_training_ = false;
  bool has_input_ = false;
};

}  // namespace lcw
