#include "lcwnet/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace lcw {

namespace {

using nlohmann::json;

std::vector<bool> bool_or_array(const json& j, const char* key, std::size_t count,
                                bool fallback) {
  if (!j.contains(key)) return std::vector<bool>(count, fallback);
  const auto& v = j.at(key);
  if (v.is_boolean()) return std::vector<bool>(count, v.get<bool>());
  if (v.is_array()) {
    if (v.size() != count)
      throw std::invalid_argument(std::string("config: '") + key + "' needs " +
                                  std::to_string(count) + " entries, got " +
                                  std::to_string(v.size()));
    std::vector<bool> out;
    for (const auto& x : v) out.push_back(x.get<bool>());
    return out;
  }
  throw std::invalid_argument(std::string("config: '") + key + "' must be bool or array");
}

ModelSpec model_from_json(const json& j) {
  ModelSpec spec;
  if (j.contains("widths")) {
    spec.hidden = j.at("widths").get<std::vector<std::size_t>>();
  } else {
    const auto layers = j.at("hidden_layers").get<std::size_t>();
    const auto units = layers > 0 ? j.at("hidden_units").get<std::size_t>() : 0;
    spec.hidden.assign(layers, units);
  }

  const std::string act = j.value("activation", "sigmoid");
  if (act == "sigmoid")
    spec.activation = Activation::sigmoid;
  else if (act == "relu")
    spec.activation = Activation::relu;
  else
    throw std::invalid_argument("config: unknown activation '" + act + "'");

  spec.lcw = bool_or_array(j, "lcw", spec.hidden.size() + 1, false);
  spec.batchnorm = bool_or_array(j, "batchnorm", spec.hidden.size(), false);
  spec.bn_after_activation = j.value("bn_after_activation", false);
  return spec;
}

DatasetSpec dataset_from_json(const json& j) {
  DatasetSpec spec;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "synthetic") {
    spec.kind = DatasetKind::synthetic;
    spec.synthetic.classes = j.value("classes", std::size_t{2});
    spec.synthetic.dim = j.value("dim", std::size_t{2});
    spec.synthetic.samples_per_class = j.value("train_per_class", std::size_t{100});
    spec.synthetic.separation = j.value("separation", 1.0);
    spec.synthetic_test_per_class = j.value("test_per_class", std::size_t{100});
  } else if (kind == "cifar10" || kind == "cifar100") {
    spec.kind = kind == "cifar10" ? DatasetKind::cifar10 : DatasetKind::cifar100;
    spec.dir = j.value("dir", std::string());
  } else {
    throw std::invalid_argument("config: unknown dataset kind '" + kind + "'");
  }
  return spec;
}

}  // namespace

Network build_mlp(const ModelSpec& spec, std::size_t input_dim, std::size_t classes) {
  std::vector<bool> lcw = spec.lcw;
  if (lcw.empty()) lcw.assign(spec.hidden.size() + 1, false);
  std::vector<bool> batchnorm = spec.batchnorm;
  if (batchnorm.empty()) batchnorm.assign(spec.hidden.size(), false);
  if (lcw.size() != spec.hidden.size() + 1)
    throw std::invalid_argument("build_mlp: lcw flags must cover every dense layer");
  if (batchnorm.size() != spec.hidden.size())
    throw std::invalid_argument("build_mlp: batchnorm flags must cover every hidden layer");

  Network net;
  std::size_t prev = input_dim;
  for (std::size_t h = 0; h < spec.hidden.size(); ++h) {
    const WeightMode mode = lcw[h] ? WeightMode::lcw : WeightMode::standard;
    net.add(std::make_unique<DenseLayer>(prev, spec.hidden[h], mode));
    if (batchnorm[h] && !spec.bn_after_activation)
      net.add(std::make_unique<BatchNormLayer>(spec.hidden[h]));
    net.add(std::make_unique<ActivationLayer>(spec.activation));
    if (batchnorm[h] && spec.bn_after_activation)
      net.add(std::make_unique<BatchNormLayer>(spec.hidden[h]));
    prev = spec.hidden[h];
  }
  const WeightMode mode = lcw.back() ? WeightMode::lcw : WeightMode::standard;
  net.add(std::make_unique<DenseLayer>(prev, classes, mode));
  return net;
}

TrainConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }

  TrainConfig cfg;
  cfg.seed = j.value("seed", std::uint64_t{1});
  cfg.dataset = dataset_from_json(j.at("dataset"));
  cfg.model = model_from_json(j.at("model"));

  const std::string scheme = j.contains("init")
                                 ? j.at("init").value("scheme", "minibatch_rescale")
                                 : std::string("minibatch_rescale");
  if (scheme == "minibatch_rescale")
    cfg.init = InitScheme::minibatch_rescale;
  else if (scheme == "glorot_uniform")
    cfg.init = InitScheme::glorot_uniform;
  else
    throw std::invalid_argument("config: unknown init scheme '" + scheme + "'");

  if (j.contains("train")) {
    const auto& t = j.at("train");
    cfg.epochs = t.value("epochs", cfg.epochs);
    cfg.batch_size = t.value("batch_size", cfg.batch_size);
    cfg.learning_rate = t.value("learning_rate", cfg.learning_rate);
    cfg.lr_decay = t.value("lr_decay", cfg.lr_decay);
    cfg.lr_floor = t.value("lr_floor", cfg.lr_floor);
    cfg.momentum = t.value("momentum", cfg.momentum);
    cfg.weight_decay = t.value("weight_decay", cfg.weight_decay);
    cfg.augment = t.value("augment", cfg.augment);
  }
  cfg.out_dir = j.value("out_dir", cfg.out_dir);

  if (cfg.batch_size < 1) throw std::invalid_argument("config: batch_size must be positive");
  if (!(cfg.learning_rate > 0.0) || !(cfg.lr_decay > 0.0) || !(cfg.lr_floor > 0.0))
    throw std::invalid_argument("config: learning rates must be positive");
  if (cfg.momentum < 0.0 || cfg.weight_decay < 0.0)
    throw std::invalid_argument("config: momentum/weight_decay must be non-negative");
  bool any_bn = false;
  for (bool b : cfg.model.batchnorm) any_bn = any_bn || b;
  if (any_bn && cfg.batch_size < 2)
    throw std::invalid_argument("config: batch_size must be >= 2 with batch norm");
  return cfg;
}

TrainConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_json_text(buf.str());
}

double lr_schedule(std::size_t epoch, const TrainConfig& cfg) {
  const double rate = cfg.learning_rate * std::pow(cfg.lr_decay, static_cast<double>(epoch));
  return std::max(rate, cfg.lr_floor);
}

void SgdState::step(const std::vector<ParamSlot>& slots, double lr, double momentum,
                    double weight_decay) {
  if (buffers_.empty()) {
    buffers_.reserve(slots.size());
    for (const auto& slot : slots) buffers_.emplace_back(slot.value->size(), 0.0);
  }
  if (buffers_.size() != slots.size())
    throw std::invalid_argument("SgdState: slot count changed between steps");
  for (std::size_t s = 0; s < slots.size(); ++s) {
    auto& value = *slots[s].value;
    const auto& grad = *slots[s].grad;
    auto& buf = buffers_[s];
    if (value.size() != buf.size())
      throw std::invalid_argument("SgdState: slot size changed between steps");
    const double wd = slots[s].decay ? weight_decay : 0.0;
    for (std::size_t k = 0; k < value.size(); ++k) {
      buf[k] = momentum * buf[k] + (grad[k] + wd * value[k]);
      value[k] -= lr * buf[k];
    }
  }
}

std::string MetricsLog::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,train_loss,train_accuracy,test_loss,test_accuracy,learning_rate\n";
  for (const auto& r : rows)
    out << r.epoch << "," << r.train_loss << "," << r.train_accuracy << "," << r.test_loss
        << "," << r.test_accuracy << "," << r.learning_rate << "\n";
  return out.str();
}

std::pair<double, double> evaluate(const Network& net, const Dataset& data,
                                   std::size_t batch_size) {
  const std::size_t n = data.size();
  if (n == 0) throw std::invalid_argument("evaluate: empty dataset");
  double loss_sum = 0.0;
  double acc_sum = 0.0;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t b = std::min(batch_size, n - start);
    Matrix x(data.inputs.rows(), b);
    std::vector<int> y(b);
    for (std::size_t j = 0; j < b; ++j) {
      for (std::size_t f = 0; f < x.rows(); ++f) x(f, j) = data.inputs(f, start + j);
      y[j] = data.labels[start + j];
    }
    const Matrix logits = net.predict(x);
    const LossResult res = softmax_xent_loss(logits, y);
    loss_sum += res.loss * static_cast<double>(b);
    acc_sum += accuracy(logits, y) * static_cast<double>(b);
  }
  return {loss_sum / static_cast<double>(n), acc_sum / static_cast<double>(n)};
}

TrainOutput train(const TrainConfig& cfg, std::ostream* log_stream) {
  Rng rng(cfg.seed);

  TrainOutput out;
  switch (cfg.dataset.kind) {
    case DatasetKind::synthetic: {
      DatasetPair pair = make_synthetic_split(cfg.dataset.synthetic,
                                              cfg.dataset.synthetic_test_per_class, rng);
      out.train_data = std::move(pair.train);
      out.test_data = std::move(pair.test);
      break;
    }
    case DatasetKind::cifar10:
    case DatasetKind::cifar100: {
      std::string dir = cfg.dataset.dir;
      if (dir.empty()) {
        const char* env = std::getenv("LCWNET_DATA_DIR");
        if (env == nullptr)
          throw std::runtime_error(
              "train: no dataset directory given and LCWNET_DATA_DIR is unset");
        dir = env;
      }
      DatasetPair pair = cfg.dataset.kind == DatasetKind::cifar10 ? load_cifar10(dir)
                                                                  : load_cifar100(dir);
      out.train_data = std::move(pair.train);
      out.test_data = std::move(pair.test);
      break;
    }
  }
  const Dataset& train_data = out.train_data;
  const std::size_t n = train_data.size();

  Network net = build_mlp(cfg.model, train_data.inputs.rows(), train_data.classes);
  net.set_training(true);
  bool has_batchnorm = false;
  for (std::size_t i = 0; i < net.size(); ++i)
    has_batchnorm = has_batchnorm || net.layer(i).kind() == "batchnorm";

  const bool augment = cfg.augment && train_data.channels > 0;
  SgdState sgd;
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const double lr = lr_schedule(epoch, cfg);

    // Seeded Fisher-Yates shuffle.
    for (std::size_t i = n - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
      std::swap(perm[i], perm[j]);
    }

    double loss_sum = 0.0;
    double acc_sum = 0.0;
    std::size_t seen = 0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size, ++batch_index) {
      const std::size_t b = std::min(cfg.batch_size, n - start);
      if (b < 2 && has_batchnorm) continue;  // batch stats need two samples
      Matrix x(train_data.inputs.rows(), b);
      std::vector<int> y(b);
      for (std::size_t j = 0; j < b; ++j) {
        const std::size_t src = perm[start + j];
        for (std::size_t f = 0; f < x.rows(); ++f) x(f, j) = train_data.inputs(f, src);
        y[j] = train_data.labels[src];
      }
      if (augment)
        x = augment_batch(x, train_data.channels, train_data.height, train_data.width, rng);

      // The init batch is the first batch actually consumed by training.
      if (epoch == 0 && batch_index == 0) {
        if (cfg.init == InitScheme::minibatch_rescale)
          minibatch_rescale_init(net, x, rng);
        else
          glorot_init(net, rng);
      }

      net.zero_grad();
      const double loss = net.loss(x, y);
      if (!std::isfinite(loss))
        throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                 ", batch " + std::to_string(batch_index));
      net.backward();
      sgd.step(net.params(), lr, cfg.momentum, cfg.weight_decay);
      net.sync_parameters();

      loss_sum += loss * static_cast<double>(b);
      acc_sum += accuracy(net.layer_output(net.size() - 1), y) * static_cast<double>(b);
      seen += b;
    }

    EpochRow row;
    row.epoch = epoch;
    row.learning_rate = lr;
    row.train_loss = loss_sum / static_cast<double>(seen);
    row.train_accuracy = acc_sum / static_cast<double>(seen);
    const auto [test_loss, test_acc] = evaluate(net, out.test_data, cfg.batch_size);
    row.test_loss = test_loss;
    row.test_accuracy = test_acc;
    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.log.rows.push_back(row);

    if (log_stream != nullptr)
      *log_stream << "epoch " << epoch << " lr " << lr << " train_loss " << row.train_loss
                  << " train_acc " << row.train_accuracy << " test_loss " << row.test_loss
                  << " test_acc " << row.test_accuracy << " wall_s " << row.wall_seconds
                  << "\n";
  }

  out.net = std::move(net);
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << content;
  if (!f) throw std::runtime_error("failed writing " + path);
}

}  // namespace lcw
