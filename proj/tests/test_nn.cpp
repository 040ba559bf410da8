#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "lcwnet/checkpoint.hpp"
#include "lcwnet/conv.hpp"
#include "lcwnet/gradcheck.hpp"
#include "lcwnet/init.hpp"
#include "lcwnet/network.hpp"
#include "lcwnet/stats.hpp"
#include "lcwnet/trainer.hpp"

using namespace lcw;

namespace {

Network small_lcw_mlp(std::size_t depth, std::size_t width, std::size_t input_dim,
                      std::size_t classes) {
  ModelSpec spec;
  spec.hidden.assign(depth, width);
  spec.activation = Activation::sigmoid;
  spec.lcw.assign(depth + 1, true);
  spec.batchnorm.assign(depth, false);
  return build_mlp(spec, input_dim, classes);
}

double max_row_sum(const DenseLayer& dense) {
  double worst = 0.0;
  for (std::size_t i = 0; i < dense.out_features(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < dense.in_features(); ++j) s += dense.weights()(i, j);
    worst = std::max(worst, std::fabs(s));
  }
  return worst;
}

}  // namespace

TEST_CASE("dense forward identity") {
  DenseLayer dense(3, 3, WeightMode::standard);
  dense.weights_mutable() = Matrix::identity(3);
  Rng rng(5);
  const Matrix x = rand_uniform(rng, -1.0, 1.0, 3, 4);
  CHECK(max_abs_diff(dense.forward(x), x) == 0.0);
}

TEST_CASE("dense lcw on constant input gives zero preactivation") {
  Rng rng(7);
  DenseLayer dense(6, 4, WeightMode::lcw);
  for (auto& p : dense.neuron_params())
    for (double& x : p.v()) x = rng.uniform(-1.0, 1.0);
  dense.sync_parameters();

  const Matrix x(6, 3, 2.5);
  const Matrix z = dense.forward(x);
  for (double v : z.data()) CHECK(std::fabs(v) < 1e-10);
}

TEST_CASE("dense forward matches naive loop oracle") {
  Rng rng(11);
  DenseLayer dense(5, 4, WeightMode::standard);
  dense.weights_mutable() = rand_uniform(rng, -1.0, 1.0, 4, 5);
  for (double& b : dense.bias()) b = rng.uniform(-1.0, 1.0);
  const Matrix x = rand_uniform(rng, -1.0, 1.0, 5, 7);
  const Matrix z = dense.forward(x);

  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 7; ++j) {
      double expect = dense.bias()[i];
      for (std::size_t k = 0; k < 5; ++k) expect += dense.weights()(i, k) * x(k, j);
      CHECK(std::fabs(z(i, j) - expect) < 1e-12);
    }
}

TEST_CASE("dense forward rejects mismatched input") {
  DenseLayer dense(3, 2, WeightMode::standard);
  CHECK_THROWS_AS(dense.forward(Matrix(4, 2)), std::invalid_argument);
}

TEST_CASE("dense backward with zero gradient leaves zero gradients") {
  Rng rng(13);
  DenseLayer dense(4, 3, WeightMode::standard);
  dense.weights_mutable() = rand_uniform(rng, -1.0, 1.0, 3, 4);
  dense.zero_grad();
  dense.forward(rand_uniform(rng, -1.0, 1.0, 4, 5));
  const Matrix grad_in = dense.backward(Matrix(3, 5));
  for (double v : grad_in.data()) CHECK(v == 0.0);
  for (const auto& slot : dense.params())
    for (double g : *slot.grad) CHECK(g == 0.0);
}

TEST_CASE("dense backward through the identity passes gradients through") {
  DenseLayer dense(3, 3, WeightMode::standard);
  dense.weights_mutable() = Matrix::identity(3);
  Rng rng(17);
  dense.forward(rand_uniform(rng, -1.0, 1.0, 3, 2));
  const Matrix g = rand_uniform(rng, -1.0, 1.0, 3, 2);
  CHECK(max_abs_diff(dense.backward(g), g) == 0.0);
}

TEST_CASE("backward before forward is an error") {
  DenseLayer dense(3, 3, WeightMode::standard);
  CHECK_THROWS_AS(dense.backward(Matrix(3, 2)), std::logic_error);
  ActivationLayer act(Activation::sigmoid);
  CHECK_THROWS_AS(act.backward(Matrix(3, 2)), std::logic_error);
  BatchNormLayer bn(3);
  CHECK_THROWS_AS(bn.backward(Matrix(3, 2)), std::logic_error);
  Conv2dLayer conv(1, 1, 1, 1, 1, 0, WeightMode::standard);
  CHECK_THROWS_AS(conv.backward(Tensor4(1, 1, 1, 1)), std::logic_error);
}

TEST_CASE("conv 1x1 kernel of value one is the identity map") {
  Conv2dLayer conv(1, 1, 1, 1, 1, 0, WeightMode::standard);
  conv.kernels().at(0, 0, 0, 0) = 1.0;
  Rng rng(19);
  Tensor4 x(2, 1, 4, 4);
  for (double& v : x.data()) v = rng.uniform(-1.0, 1.0);
  const Tensor4 y = conv.forward(x);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(y.data()[i] == x.data()[i]);
}

TEST_CASE("conv shape validation") {
  Conv2dLayer conv(1, 2, 3, 3, 1, 0, WeightMode::standard);
  CHECK_THROWS_AS(conv.forward(Tensor4(1, 3, 5, 5)), std::invalid_argument);  // channels
  CHECK_THROWS_AS(conv.forward(Tensor4(1, 2, 2, 2)), std::invalid_argument);  // too small
}

TEST_CASE("sigmoid values and derivative at zero") {
  ActivationLayer act(Activation::sigmoid);
  Matrix x(1, 1, 0.0);
  const Matrix a = act.forward(x);
  CHECK(a(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  const Matrix g = act.backward(Matrix(1, 1, 1.0));
  CHECK(g(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("sigmoid is stable for extreme negative inputs") {
  CHECK(sigmoid_scalar(-710.0) > 0.0);
  CHECK(std::isfinite(sigmoid_scalar(-710.0)));
  CHECK(sigmoid_scalar(710.0) == doctest::Approx(1.0));
  // Against a high-precision reference: sigmoid(-710) = exp(-710)/(1+exp(-710)).
  CHECK(sigmoid_scalar(-710.0) == doctest::Approx(4.476286225675130e-309).epsilon(1e-3));
}

TEST_CASE("relu values and subgradient convention at zero") {
  ActivationLayer act(Activation::relu);
  Matrix x = Matrix::from_rows({{-3.0, 0.0, 2.0}});
  const Matrix a = act.forward(x);
  CHECK(a(0, 0) == 0.0);
  CHECK(a(0, 1) == 0.0);
  CHECK(a(0, 2) == 2.0);
  const Matrix g = act.backward(Matrix(1, 3, 1.0));
  CHECK(g(0, 0) == 0.0);
  CHECK(g(0, 1) == 0.0);  // f'(0) = 0
  CHECK(g(0, 2) == 1.0);
}

TEST_CASE("batchnorm hand-computed batch") {
  BatchNormLayer bn(1, /*epsilon=*/0.0);
  const Matrix x = Matrix::from_rows({{1.0, 2.0, 3.0}});
  const Matrix y = bn.forward(x);
  // mu = 2, population var = 2/3.
  CHECK(y(0, 0) == doctest::Approx(-1.2247448713915890).epsilon(1e-12));
  CHECK(y(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(y(0, 2) == doctest::Approx(1.2247448713915890).epsilon(1e-12));
}

TEST_CASE("batchnorm normalizes the batch in train mode") {
  Rng rng(23);
  BatchNormLayer bn(4);
  // Large input variance keeps the epsilon correction below 1e-6.
  const Matrix x = rand_normal(rng, 3.0, 10.0, 4, 64);
  const Matrix y = bn.forward(x);
  for (std::size_t f = 0; f < 4; ++f) {
    const std::span<const double> row(y.row_ptr(f), y.cols());
    CHECK(std::fabs(mean_of(row)) < 1e-10);
    CHECK(std::fabs(variance_of(row) - 1.0) < 1e-6);
  }
}

TEST_CASE("batchnorm eval mode depends only on running statistics") {
  Rng rng(29);
  BatchNormLayer bn(3);
  for (int i = 0; i < 5; ++i) bn.forward(rand_normal(rng, 1.0, 2.0, 3, 32));
  bn.set_training(false);

  Matrix probe = rand_uniform(rng, -1.0, 1.0, 3, 1);
  Matrix batch_a(3, 4);
  Matrix batch_b(3, 9);
  for (std::size_t f = 0; f < 3; ++f) {
    for (std::size_t j = 0; j < 4; ++j) batch_a(f, j) = j == 0 ? probe(f, 0) : rng.next_unit();
    for (std::size_t j = 0; j < 9; ++j) batch_b(f, j) = j == 0 ? probe(f, 0) : rng.next_unit();
  }
  const Matrix ya = bn.forward(batch_a);
  const Matrix yb = bn.forward(batch_b);
  for (std::size_t f = 0; f < 3; ++f) CHECK(ya(f, 0) == yb(f, 0));

  // infer() agrees with eval-mode forward.
  const Matrix yc = bn.infer(batch_a);
  CHECK(max_abs_diff(ya, yc) == 0.0);
}

TEST_CASE("batchnorm rejects train-mode batches smaller than two") {
  BatchNormLayer bn(2);
  CHECK_THROWS_AS(bn.forward(Matrix(2, 1)), std::invalid_argument);
}

TEST_CASE("softmax cross-entropy of uniform logits is ln(classes)") {
  const Matrix logits(10, 4, 0.0);
  const std::vector<int> labels = {0, 3, 7, 9};
  const LossResult res = softmax_xent_loss(logits, labels);
  CHECK(res.loss == doctest::Approx(std::log(10.0)).epsilon(1e-12));
}

TEST_CASE("softmax cross-entropy loss vanishes as the margin grows") {
  double prev = 1e300;
  for (double margin : {1.0, 5.0, 20.0, 100.0}) {
    Matrix logits(3, 1, 0.0);
    logits(1, 0) = margin;
    const LossResult res = softmax_xent_loss(logits, {1});
    CHECK(res.loss < prev);
    prev = res.loss;
  }
  CHECK(prev < 1e-10);
}

TEST_CASE("softmax cross-entropy rejects out-of-range labels") {
  const Matrix logits(3, 2, 0.0);
  CHECK_THROWS_AS(softmax_xent_loss(logits, {0, 3}), std::invalid_argument);
  CHECK_THROWS_AS(softmax_xent_loss(logits, {-1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(softmax_xent_loss(logits, {0}), std::invalid_argument);
}

TEST_CASE("zero-hidden-layer network equals softmax on a dense layer") {
  Rng rng(31);
  ModelSpec spec;
  spec.activation = Activation::sigmoid;
  spec.lcw = {false};
  Network net = build_mlp(spec, 5, 3);
  glorot_init(net, rng);

  const Matrix x = rand_uniform(rng, -1.0, 1.0, 5, 6);
  const std::vector<int> labels = {0, 1, 2, 0, 1, 2};
  const double net_loss = net.loss(x, labels);

  auto& dense = dynamic_cast<DenseLayer&>(net.layer(0));
  DenseLayer clone(5, 3, WeightMode::standard);
  clone.weights_mutable() = dense.weights();
  clone.bias() = dense.bias();
  const LossResult direct = softmax_xent_loss(clone.forward(x), labels);
  CHECK(net_loss == doctest::Approx(direct.loss).epsilon(1e-15));
}

TEST_CASE("gradcheck suite passes for every layer type") {
  for (const auto& result : run_gradcheck_suite(101)) {
    INFO(result.name, " rel error ", result.max_rel_error);
    CHECK(result.pass);
  }
}

TEST_CASE("20-layer lcw sigmoid MLP takes a step without NaNs") {
  Rng rng(37);
  Network net = small_lcw_mlp(20, 16, 8, 4);
  const Matrix batch = rand_uniform(rng, 0.0, 1.0, 8, 40);
  minibatch_rescale_init(net, batch, rng);

  std::vector<int> labels(40);
  for (auto& y : labels) y = static_cast<int>(rng.below(4));
  net.zero_grad();
  const double loss = net.loss(batch, labels);
  CHECK(std::isfinite(loss));
  net.backward();

  SgdState sgd;
  sgd.step(net.params(), 0.1, 0.9, 1e-4);
  net.sync_parameters();
  for (const auto& slot : net.params()) {
    for (double g : *slot.grad) CHECK(std::isfinite(g));
    for (double v : *slot.value) CHECK(std::isfinite(v));
  }
}

TEST_CASE("lcw constraint holds after SGD steps") {
  Rng rng(41);
  Network net = small_lcw_mlp(3, 12, 6, 3);
  const Matrix batch = rand_uniform(rng, 0.0, 1.0, 6, 32);
  minibatch_rescale_init(net, batch, rng);

  std::vector<int> labels(32);
  for (auto& y : labels) y = static_cast<int>(rng.below(3));
  SgdState sgd;
  for (int step = 0; step < 25; ++step) {
    net.zero_grad();
    net.loss(batch, labels);
    net.backward();
    sgd.step(net.params(), 0.1, 0.9, 1e-4);
    net.sync_parameters();
  }
  for (std::size_t i = 0; i < net.size(); ++i)
    if (auto* dense = dynamic_cast<DenseLayer*>(&net.layer(i)))
      CHECK(max_row_sum(*dense) < 1e-9);
}

TEST_CASE("row and column squared norms agree for square matrices") {
  Rng rng(43);
  for (std::size_t m : {2, 16, 64}) {
    const Matrix w = rand_uniform(rng, -1.0, 1.0, m, m);
    double eta = 0.0, xi = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) eta += w(i, j) * w(i, j);
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t i = 0; i < m; ++i) xi += w(i, j) * w(i, j);
    CHECK(std::fabs(eta - xi) / eta < 1e-12);
  }
}

TEST_CASE("checkpoint round-trips bit-exactly") {
  Rng rng(47);
  ModelSpec spec;
  spec.hidden = {10, 8};
  spec.activation = Activation::sigmoid;
  spec.lcw = {true, false, true};
  spec.batchnorm = {true, false};
  Network net = build_mlp(spec, 6, 3);

  const Matrix batch = rand_uniform(rng, 0.0, 1.0, 6, 40);
  minibatch_rescale_init(net, batch, rng);
  // Populate batch-norm running statistics.
  std::vector<int> labels(40);
  for (auto& y : labels) y = static_cast<int>(rng.below(3));
  net.loss(batch, labels);

  const std::string path = "checkpoint_roundtrip_test.bin";
  save_checkpoint(net, path);
  Network loaded = load_checkpoint(path);

  const Matrix probe = rand_uniform(rng, 0.0, 1.0, 6, 9);
  const Matrix orig_logits = net.predict(probe);
  const Matrix load_logits = loaded.predict(probe);
  CHECK(max_abs_diff(orig_logits, load_logits) == 0.0);

  const std::vector<int> probe_labels = {0, 1, 2, 0, 1, 2, 0, 1, 2};
  const double orig_loss = softmax_xent_loss(orig_logits, probe_labels).loss;
  const double load_loss = softmax_xent_loss(load_logits, probe_labels).loss;
  CHECK(std::fabs(orig_loss - load_loss) < 1e-12);
  std::remove(path.c_str());
}

TEST_CASE("checkpoint loader rejects garbage") {
  const std::string path = "checkpoint_garbage_test.bin";
  write_text_file(path, "not a checkpoint");
  CHECK_THROWS_AS(load_checkpoint(path), std::runtime_error);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_checkpoint("no_such_file.bin"), std::runtime_error);
}
