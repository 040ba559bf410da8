#include "lcwnet/init.hpp"

#include <cmath>
#include <stdexcept>

#include "lcwnet/stats.hpp"

namespace lcw {

namespace {

void fill_dense_uniform(DenseLayer& layer, Rng& rng, double a) {
  if (layer.mode() == WeightMode::lcw) {
    const std::size_t m = layer.in_features();
    std::vector<double> w(m);
    for (auto& p : layer.neuron_params()) {
      for (double& x : w) x = rng.uniform(-a, a);
      p.v() = p.basis().project(w);
    }
  } else {
    for (double& x : layer.weights_mutable().data()) x = rng.uniform(-a, a);
  }
  for (double& b : layer.bias()) b = 0.0;
  layer.sync_parameters();
}

}  // namespace

void glorot_init(DenseLayer& layer, Rng& rng) {
  const double fan_in = static_cast<double>(layer.in_features());
  const double fan_out = static_cast<double>(layer.out_features());
  fill_dense_uniform(layer, rng, std::sqrt(6.0 / (fan_in + fan_out)));
}

void glorot_init(Conv2dLayer& layer, Rng& rng) {
  const double fan_in = static_cast<double>(layer.c_in() * layer.k_h() * layer.k_w());
  const double fan_out = static_cast<double>(layer.c_out() * layer.k_h() * layer.k_w());
  const double a = std::sqrt(6.0 / (fan_in + fan_out));
  if (layer.mode() == WeightMode::lcw) {
    const std::size_t m = layer.c_in() * layer.k_h() * layer.k_w();
    std::vector<double> w(m);
    for (auto& p : layer.kernel_params()) {
      for (double& x : w) x = rng.uniform(-a, a);
      p.v() = p.basis().project(w);
    }
  } else {
    for (double& x : layer.kernels().data()) x = rng.uniform(-a, a);
  }
  for (double& b : layer.bias()) b = 0.0;
  layer.sync_parameters();
}

void glorot_init(Network& net, Rng& rng) {
  for (std::size_t i = 0; i < net.size(); ++i)
    if (auto* dense = dynamic_cast<DenseLayer*>(&net.layer(i))) glorot_init(*dense, rng);
}

void minibatch_rescale_init(Network& net, const Matrix& batch, Rng& rng) {
  if (batch.cols() < 32)
    throw std::invalid_argument("minibatch_rescale_init: needs a batch of >= 32 samples, got " +
                                std::to_string(batch.cols()));

  Matrix activ = batch;
  for (std::size_t i = 0; i < net.size(); ++i) {
    auto* dense = dynamic_cast<DenseLayer*>(&net.layer(i));
    if (dense == nullptr) {
      activ = net.layer(i).forward(activ);
      continue;
    }

    if (dense->mode() == WeightMode::lcw) {
      for (auto& p : dense->neuron_params())
        for (double& x : p.v()) x = rng.uniform(-1.0, 1.0);
    } else {
      for (double& x : dense->weights_mutable().data()) x = rng.uniform(-1.0, 1.0);
    }
    for (double& b : dense->bias()) b = 0.0;
    dense->sync_parameters();

    Matrix z = dense->forward(activ);
    const double s = std::sqrt(variance_of(z.data()));
    if (s < 1e-12)
      throw std::runtime_error("minibatch_rescale_init: degenerate preactivation at layer " +
                               std::to_string(i));

    const double inv = 1.0 / s;
    if (dense->mode() == WeightMode::lcw) {
      for (auto& p : dense->neuron_params())
        for (double& x : p.v()) x *= inv;
    } else {
      dense->weights_mutable().scale(inv);
    }
    dense->sync_parameters();
    // Bias is zero, so the preactivation scales exactly with the weights.
    z.scale(inv);
    activ = std::move(z);
  }
}

}  // namespace lcw
