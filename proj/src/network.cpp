#include "lcwnet/network.hpp"

#include <stdexcept>

namespace lcw {

const Matrix& Network::forward(const Matrix& x) {
  if (layers_.empty()) throw std::logic_error("Network: no layers");
  outputs_.clear();
  outputs_.reserve(layers_.size());
  const Matrix* cur = &x;
  for (auto& layer : layers_) {
    outputs_.push_back(layer->forward(*cur));
    cur = &outputs_.back();
  }
  has_forward_ = true;
  has_loss_ = false;
  return outputs_.back();
}

double Network::loss(const Matrix& x, const std::vector<int>& labels) {
  const Matrix& logits = forward(x);
  LossResult res = softmax_xent_loss(logits, labels);
  loss_grad_ = std::move(res.grad_logits);
  has_loss_ = true;
  return res.loss;
}

Matrix Network::backward() {
  if (!has_loss_) throw std::logic_error("Network backward: no stored loss gradient; call loss()");
  return backward(loss_grad_);
}

Matrix Network::backward(const Matrix& grad_logits) {
  if (!has_forward_) throw std::logic_error("Network backward: called before forward");
  output_grads_.assign(layers_.size(), Matrix());
  Matrix grad = grad_logits;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    output_grads_[i] = grad;
    grad = layers_[i]->backward(output_grads_[i]);
  }
  return grad;
}

Matrix Network::predict(const Matrix& x) const {
  if (layers_.empty()) throw std::logic_error("Network: no layers");
  Matrix cur = layers_[0]->infer(x);
  for (std::size_t i = 1; i < layers_.size(); ++i) cur = layers_[i]->infer(cur);
  return cur;
}

std::vector<ParamSlot> Network::params() {
  std::vector<ParamSlot> all;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    for (auto& slot : layers_[i]->params()) {
      slot.name = "layer" + std::to_string(i) + "." + slot.name;
      all.push_back(slot);
    }
  }
  return all;
}

void Network::zero_grad() {
  for (auto& layer : layers_) layer->zero_grad();
}

void Network::sync_parameters() {
  for (auto& layer : layers_) layer->sync_parameters();
}

void Network::set_training(bool training) {
  for (auto& layer : layers_) layer->set_training(training);
}

}  // namespace lcw
