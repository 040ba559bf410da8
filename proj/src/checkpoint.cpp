#include "lcwnet/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace lcw {

namespace {

constexpr char kMagic[8] = {'L', 'C', 'W', 'N', 'E', 'T', '0', '1'};
constexpr std::uint32_t kVersion = 1;

enum : std::uint32_t { kDense = 1, kSigmoid = 2, kRelu = 3, kBatchNorm = 4 };

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  Reader(std::string bytes, std::string path) : bytes_(std::move(bytes)), path_(std::move(path)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }

  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(bits);
  }

  void expect_magic() {
    need(8);
    for (int i = 0; i < 8; ++i)
      if (bytes_[pos_ + i] != kMagic[i])
        throw std::runtime_error("checkpoint: " + path_ + " has no LCWNET01 magic");
    pos_ += 8;
  }

  bool exhausted() const { return pos_ == bytes_.size(); }
  std::size_t position() const { return pos_; }

 private:
  void need(std::size_t count) {
    if (pos_ + count > bytes_.size())
      throw std::runtime_error("checkpoint: " + path_ + " truncated at byte " +
                               std::to_string(pos_));
  }

  std::string bytes_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(Network& net, const std::string& path) {
  std::string out;
  out.append(kMagic, sizeof(kMagic));
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(net.size()));

  for (std::size_t i = 0; i < net.size(); ++i) {
    Layer& layer = net.layer(i);
    const std::string kind = layer.kind();
    if (kind == "dense") {
      auto& dense = dynamic_cast<DenseLayer&>(layer);
      put_u32(out, kDense);
      put_u32(out, dense.mode() == WeightMode::lcw ? 1 : 0);
      put_u32(out, static_cast<std::uint32_t>(dense.in_features()));
      put_u32(out, static_cast<std::uint32_t>(dense.out_features()));
      if (dense.mode() == WeightMode::lcw) {
        for (auto& p : dense.neuron_params())
          for (double v : p.v()) put_f64(out, v);
      } else {
        for (double v : dense.weights().data()) put_f64(out, v);
      }
      for (double v : dense.bias()) put_f64(out, v);
    } else if (kind == "sigmoid") {
      put_u32(out, kSigmoid);
    } else if (kind == "relu") {
      put_u32(out, kRelu);
    } else if (kind == "batchnorm") {
      auto& bn = dynamic_cast<BatchNormLayer&>(layer);
      put_u32(out, kBatchNorm);
      put_u32(out, static_cast<std::uint32_t>(bn.features()));
      put_f64(out, bn.epsilon());
      put_f64(out, bn.momentum());
      for (double v : bn.gamma()) put_f64(out, v);
      for (double v : bn.beta()) put_f64(out, v);
      for (double v : bn.running_mean()) put_f64(out, v);
      for (double v : bn.running_var()) put_f64(out, v);
    } else {
      throw std::runtime_error("checkpoint: unsupported layer kind '" + kind + "'");
    }
  }

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("checkpoint: failed writing " + path);
}

Network load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  Reader in(std::move(bytes), path);

  in.expect_magic();
  const std::uint32_t version = in.u32();
  if (version != kVersion)
    throw std::runtime_error("checkpoint: " + path + " has unsupported version " +
                             std::to_string(version));
  const std::uint32_t count = in.u32();

  Network net;
  for (std::uint32_t l = 0; l < count; ++l) {
    const std::uint32_t tag = in.u32();
    switch (tag) {
      case kDense: {
        const std::uint32_t mode = in.u32();
        const std::uint32_t in_f = in.u32();
        const std::uint32_t out_f = in.u32();
        auto dense = std::make_unique<DenseLayer>(
            in_f, out_f, mode == 1 ? WeightMode::lcw : WeightMode::standard);
        if (mode == 1) {
          for (auto& p : dense->neuron_params())
            for (double& v : p.v()) v = in.f64();
        } else {
          for (double& v : dense->weights_mutable().data()) v = in.f64();
        }
        for (double& v : dense->bias()) v = in.f64();
        dense->sync_parameters();
        net.add(std::move(dense));
        break;
      }
      case kSigmoid:
        net.add(std::make_unique<ActivationLayer>(Activation::sigmoid));
        break;
      case kRelu:
        net.add(std::make_unique<ActivationLayer>(Activation::relu));
        break;
      case kBatchNorm: {
        const std::uint32_t features = in.u32();
        const double eps = in.f64();
        const double momentum = in.f64();
        auto bn = std::make_unique<BatchNormLayer>(features, eps, momentum);
        for (double& v : bn->gamma()) v = in.f64();
        for (double& v : bn->beta()) v = in.f64();
        for (double& v : bn->running_mean()) v = in.f64();
        for (double& v : bn->running_var()) v = in.f64();
        net.add(std::move(bn));
        break;
      }
      default:
        throw std::runtime_error("checkpoint: " + path + " has unknown layer tag " +
                                 std::to_string(tag) + " at byte " +
                                 std::to_string(in.position() - 4));
    }
  }
  if (!in.exhausted())
    throw std::runtime_error("checkpoint: " + path + " has trailing bytes at " +
                             std::to_string(in.position()));
  return net;
}

}  // namespace lcw
