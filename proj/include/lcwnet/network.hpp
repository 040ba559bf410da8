#pragma once

#include <memory>
#include <vector>

#include "lcwnet/layers.hpp"
#include "lcwnet/loss.hpp"
#include "lcwnet/matrix.hpp"

namespace lcw {

/// Ordered layer stack with a softmax cross-entropy head.
///
/// forward()/backward() retain every layer's output and the gradient that
/// reached it, so diagnostics can read per-layer preactivations and their
/// gradients after a single pass. predict() is the read-only evaluation path
/// (batch-norm layers use their running statistics).
class Network {
 public:
  Network() = default;
  Network(Network&&) = default;
  Network& operator=(Network&&) = default;

  void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }

  std::size_t size() const { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_[i]; }
  const Layer& layer(std::size_t i) const { return *layers_[i]; }

  /// Training-path forward; returns the logits.
  const Matrix& forward(const Matrix& x);

  /// forward + softmax cross-entropy.
  double loss(const Matrix& x, const std::vector<int>& labels);

  /// Backpropagates from the stored loss gradient (or a caller-provided
  /// logits gradient); fills every parameter gradient buffer and returns the
  /// gradient with respect to the network input.
  Matrix backward();
  Matrix backward(const Matrix& grad_logits);

  /// Stateless evaluation (batch norm in eval semantics); safe to call
  /// concurrently on disjoint inputs.
  Matrix predict(const Matrix& x) const;

  std::vector<ParamSlot> params();
  void zero_grad();
  void sync_parameters();
  void set_training(bool training);

  /// Output of layer i from the last forward().
  const Matrix& layer_output(std::size_t i) const { return outputs_[i]; }
  /// Gradient with respect to layer i's output from the last backward().
  const Matrix& layer_output_grad(std::size_t i) const { return output_grads_[i]; }

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
  std::vector<Matrix> outputs_;
  std::vector<Matrix> output_grads_;
  Matrix loss_grad_;
  bool has_forward_ = false;
  bool has_loss_ = false;
};

}  // namespace lcw
