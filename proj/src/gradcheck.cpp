#include "lcwnet/gradcheck.hpp"

#include <cmath>

#include "lcwnet/conv.hpp"
#include "lcwnet/init.hpp"
#include "lcwnet/loss.hpp"
#include "lcwnet/rng.hpp"

namespace lcw {

double gradient_rel_error(std::span<const double> analytic, std::span<const double> numeric) {
  double diff2 = 0.0, na2 = 0.0, nb2 = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double d = analytic[i] - numeric[i];
    diff2 += d * d;
    na2 += analytic[i] * analytic[i];
    nb2 += numeric[i] * numeric[i];
  }
  const double denom = std::sqrt(na2) + std::sqrt(nb2);
  if (denom < 1e-12) return 0.0;
  return std::sqrt(diff2) / denom;
}

std::vector<double> central_difference(std::vector<double>& buf,
                                       const std::function<double()>& recompute, double h) {
  std::vector<double> grad(buf.size(), 0.0);
  for (std::size_t i = 0; i < buf.size(); ++i) {
    const double keep = buf[i];
    buf[i] = keep + h;
    const double up = recompute();
    buf[i] = keep - h;
    const double down = recompute();
    buf[i] = keep;
    grad[i] = (up - down) / (2.0 * h);
  }
  recompute();
  return grad;
}

double network_grad_max_rel_error(Network& net, const Matrix& x, const std::vector<int>& labels,
                                  double h) {
  net.zero_grad();
  net.loss(x, labels);
  net.backward();

  // Snapshot the analytic gradients before finite differences overwrite state.
  std::vector<std::vector<double>> analytic;
  for (const auto& slot : net.params()) analytic.push_back(*slot.grad);

  Matrix input = x;
  const auto objective = [&]() {
    net.sync_parameters();
    Matrix fresh = input;
    return net.loss(fresh, labels);
  };

  double worst = 0.0;
  const auto slots = net.params();
  for (std::size_t s = 0; s < slots.size(); ++s) {
    const auto numeric = central_difference(*slots[s].value, objective, h);
    worst = std::max(worst, gradient_rel_error(analytic[s], numeric));
  }

  // Input gradient.
  net.zero_grad();
  net.loss(input, labels);
  const Matrix grad_input = net.backward();
  const auto numeric_input = central_difference(input.data(), objective, h);
  worst = std::max(worst, gradient_rel_error(grad_input.data(), numeric_input));
  return worst;
}

namespace {

/// Scalar objective sum(c .* out) whose gradient wrt out is exactly c.
double weighted_sum(const Matrix& out, const Matrix& c) {
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) s += out.data()[i] * c.data()[i];
  return s;
}

double weighted_sum(const Tensor4& out, const Tensor4& c) {
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) s += out.data()[i] * c.data()[i];
  return s;
}

GradCheckResult check_matrix_layer(const std::string& name, Layer& layer, Matrix x, Rng& rng,
                                   double threshold, double h = 1e-5) {
  Matrix probe = layer.forward(x);
  const Matrix c = rand_uniform(rng, -1.0, 1.0, probe.rows(), probe.cols());

  layer.zero_grad();
  const Matrix grad_in = layer.backward(c);
  std::vector<std::vector<double>> analytic;
  for (const auto& slot : layer.params()) analytic.push_back(*slot.grad);

  const auto objective = [&]() {
    layer.sync_parameters();
    return weighted_sum(layer.forward(x), c);
  };

  double worst = 0.0;
  const auto slots = layer.params();
  for (std::size_t s = 0; s < slots.size(); ++s) {
    const auto numeric = central_difference(*slots[s].value, objective, h);
    worst = std::max(worst, gradient_rel_error(analytic[s], numeric));
  }
  const auto numeric_input = central_difference(x.data(), objective, h);
  worst = std::max(worst, gradient_rel_error(grad_in.data(), numeric_input));

  return {name, worst, threshold, worst < threshold};
}

GradCheckResult check_conv_layer(const std::string& name, Conv2dLayer& layer, Tensor4 x,
                                 Rng& rng, double threshold, double h = 1e-5) {
  Tensor4 probe = layer.forward(x);
  Tensor4 c(probe.n(), probe.c(), probe.h(), probe.w());
  for (double& v : c.data()) v = rng.uniform(-1.0, 1.0);

  layer.zero_grad();
  const Tensor4 grad_in = layer.backward(c);
  std::vector<std::vector<double>> analytic;
  for (const auto& slot : layer.params()) analytic.push_back(*slot.grad);

  const auto objective = [&]() {
    layer.sync_parameters();
    return weighted_sum(layer.forward(x), c);
  };

  double worst = 0.0;
  const auto slots = layer.params();
  for (std::size_t s = 0; s < slots.size(); ++s) {
    const auto numeric = central_difference(*slots[s].value, objective, h);
    worst = std::max(worst, gradient_rel_error(analytic[s], numeric));
  }
  const auto numeric_input = central_difference(x.data(), objective, h);
  worst = std::max(worst, gradient_rel_error(grad_in.data(), numeric_input));

  return {name, worst, threshold, worst < threshold};
}

/// ReLU test points keep |z| >= 1e-3 so no sample sits on the kink.
Matrix relu_safe_input(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix x = rand_uniform(rng, -2.0, 2.0, rows, cols);
  for (double& v : x.data()) {
    if (std::fabs(v) < 1e-3) v = v >= 0.0 ? v + 1e-3 : v - 1e-3;
  }
  return x;
}

}  // namespace

std::vector<GradCheckResult> run_gradcheck_suite(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<GradCheckResult> results;

  {
    DenseLayer dense(3, 4, WeightMode::standard);
    for (double& v : dense.weights_mutable().data()) v = rng.uniform(-1.0, 1.0);
    for (double& b : dense.bias()) b = rng.uniform(-0.5, 0.5);
    results.push_back(check_matrix_layer("dense_standard_4x3", dense,
                                         rand_uniform(rng, -1.0, 1.0, 3, 5), rng, 1e-6));
  }
  {
    DenseLayer dense(3, 4, WeightMode::lcw);
    for (auto& p : dense.neuron_params())
      for (double& v : p.v()) v = rng.uniform(-1.0, 1.0);
    for (double& b : dense.bias()) b = rng.uniform(-0.5, 0.5);
    dense.sync_parameters();
    results.push_back(check_matrix_layer("dense_lcw_4x3", dense,
                                         rand_uniform(rng, -1.0, 1.0, 3, 5), rng, 1e-6));
  }
  {
    Conv2dLayer conv(4, 3, 3, 3, 1, 1, WeightMode::standard);
    for (double& v : conv.kernels().data()) v = rng.uniform(-1.0, 1.0);
    for (double& b : conv.bias()) b = rng.uniform(-0.5, 0.5);
    Tensor4 x(2, 3, 5, 5);
    for (double& v : x.data()) v = rng.uniform(-1.0, 1.0);
    results.push_back(check_conv_layer("conv2d_standard_4x3x3x3", conv, x, rng, 1e-6));
  }
  {
    Conv2dLayer conv(4, 3, 3, 3, 1, 1, WeightMode::lcw);
    for (auto& p : conv.kernel_params())
      for (double& v : p.v()) v = rng.uniform(-1.0, 1.0);
    for (double& b : conv.bias()) b = rng.uniform(-0.5, 0.5);
    conv.sync_parameters();
    Tensor4 x(2, 3, 5, 5);
    for (double& v : x.data()) v = rng.uniform(-1.0, 1.0);
    results.push_back(check_conv_layer("conv2d_lcw_4x3x3x3", conv, x, rng, 1e-6));
  }
  {
    ActivationLayer sigmoid(Activation::sigmoid);
    results.push_back(check_matrix_layer("sigmoid", sigmoid,
                                         rand_uniform(rng, -3.0, 3.0, 4, 6), rng, 1e-6));
  }
  {
    ActivationLayer relu(Activation::relu);
    results.push_back(
        check_matrix_layer("relu", relu, relu_safe_input(rng, 4, 6), rng, 1e-6));
  }
  {
    BatchNormLayer bn(4);
    for (double& g : bn.gamma()) g = rng.uniform(0.5, 1.5);
    for (double& b : bn.beta()) b = rng.uniform(-0.5, 0.5);
    results.push_back(check_matrix_layer("batchnorm_4x8", bn,
                                         rand_uniform(rng, -1.0, 1.0, 4, 8), rng, 1e-5));
  }
  {
    // Softmax cross-entropy on raw logits.
    Matrix logits = rand_uniform(rng, -1.0, 1.0, 3, 5);
    std::vector<int> labels(5);
    for (auto& y : labels) y = static_cast<int>(rng.below(3));
    LossResult res = softmax_xent_loss(logits, labels);
    const auto objective = [&]() { return softmax_xent_loss(logits, labels).loss; };
    const auto numeric = central_difference(logits.data(), objective, 1e-5);
    const double err = gradient_rel_error(res.grad_logits.data(), numeric);
    results.push_back({"softmax_xent_3x5", err, 1e-6, err < 1e-6});
  }
  {
    // Composed 3-layer sigmoid MLP, end to end through the loss.
    Network net;
    net.add(std::make_unique<DenseLayer>(6, 5, WeightMode::standard));
    net.add(std::make_unique<ActivationLayer>(Activation::sigmoid));
    net.add(std::make_unique<DenseLayer>(5, 4, WeightMode::lcw));
    net.add(std::make_unique<ActivationLayer>(Activation::sigmoid));
    net.add(std::make_unique<DenseLayer>(4, 3, WeightMode::standard));
    Rng init_rng(seed + 17);
    glorot_init(net, init_rng);
    const Matrix x = rand_uniform(rng, -1.0, 1.0, 6, 7);
    std::vector<int> labels(7);
    for (auto& y : labels) y = static_cast<int>(rng.below(3));
    const double err = network_grad_max_rel_error(net, x, labels);
    results.push_back({"mlp_6_5_4_end_to_end", err, 1e-5, err < 1e-5});
  }

  return results;
}

}  // namespace lcw
