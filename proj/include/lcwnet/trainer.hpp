#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lcwnet/dataset.hpp"
#include "lcwnet/init.hpp"
#include "lcwnet/network.hpp"

namespace lcw {

/// MLP architecture: hidden widths plus per-dense-layer LCW flags (hidden
/// layers and the output layer) and per-hidden-layer batch-norm flags.
struct ModelSpec {
  std::vector<std::size_t> hidden;
  Activation activation = Activation::sigmoid;
  std::vector<bool> lcw;        // size hidden.size() + 1
  std::vector<bool> batchnorm;  // size hidden.size()
  bool bn_after_activation = false;
};

enum class DatasetKind { synthetic, cifar10, cifar100 };

struct DatasetSpec {
  DatasetKind kind = DatasetKind::synthetic;
  std::string dir;  // cifar root; falls back to $LCWNET_DATA_DIR when empty
  SyntheticSpec synthetic;
  std::size_t synthetic_test_per_class = 100;
};

struct TrainConfig {
  std::uint64_t seed = 1;
  DatasetSpec dataset;
  ModelSpec model;
  InitScheme init = InitScheme::minibatch_rescale;

  std::size_t epochs = 100;
  std::size_t batch_size = 128;
  double learning_rate = 0.1;
  double lr_decay = 0.95;
  double lr_floor = 0.001;
  double momentum = 0.9;
  double weight_decay = 0.0001;
  bool augment = false;

  std::string out_dir = "run";
};

/// Builds the described MLP for the given input dimension and class count.
/// Dense layers in LCW mode require input dimension >= 2.
Network build_mlp(const ModelSpec& spec, std::size_t input_dim, std::size_t classes);

TrainConfig config_from_json_text(const std::string& text);
TrainConfig load_config_file(const std::string& path);

/// max(initial * decay^epoch, floor), applied at epoch boundaries.
double lr_schedule(std::size_t epoch, const TrainConfig& cfg);

/// Classical momentum SGD over a parameter snapshot:
///   buf <- momentum * buf + (grad + weight_decay * param)
///   param <- param - lr * buf
/// Weight decay only touches slots flagged for it (weights, LCW v). The state
/// owns one momentum buffer per slot, keyed by slot order.
class SgdState {
 public:
  void step(const std::vector<ParamSlot>& slots, double lr, double momentum,
            double weight_decay);

 private:
  std::vector<std::vector<double>> buffers_;
};

struct EpochRow {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double test_loss = 0.0;
  double test_accuracy = 0.0;
  double wall_seconds = 0.0;  // informational; excluded from the CSV artifact
  double learning_rate = 0.0;
};

struct MetricsLog {
  std::vector<EpochRow> rows;

  /// Deterministic CSV: every column is a pure function of (config, seed), so
  /// wall time stays out of the artifact.
  std::string to_csv() const;
};

struct TrainOutput {
  MetricsLog log;
  Network net;
  Dataset train_data;
  Dataset test_data;
};

/// Full training loop: seeded shuffle per epoch, minibatch forward/backward,
/// momentum SGD, epoch-end evaluation on the test split (batch norm in eval
/// semantics). Aborts with the offending epoch/batch when the loss goes
/// non-finite. `log_stream` (optional) receives one line per epoch including
/// wall time.
TrainOutput train(const TrainConfig& cfg, std::ostream* log_stream = nullptr);

/// Loss and accuracy of net.predict over the dataset, evaluated in chunks.
std::pair<double, double> evaluate(const Network& net, const Dataset& data,
                                   std::size_t batch_size);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace lcw
