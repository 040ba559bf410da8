#include "lcwnet/dataset.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace lcw {

namespace {

constexpr std::size_t kImageBytes = 3072;  // 3 x 32 x 32
constexpr std::size_t kChannelPixels = 1024;

std::vector<std::uint8_t> read_exact(const std::string& path, std::size_t expected_bytes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cifar: cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() != expected_bytes)
    throw std::runtime_error("cifar: " + path + " truncated at byte " +
                             std::to_string(bytes.size()) + ", expected " +
                             std::to_string(expected_bytes));
  return bytes;
}

void append_records(const std::string& path, std::size_t records, std::size_t label_bytes,
                    Matrix& inputs, std::vector<int>& labels, std::size_t& cursor) {
  const std::size_t record_len = label_bytes + kImageBytes;
  const auto bytes = read_exact(path, records * record_len);
  for (std::size_t r = 0; r < records; ++r) {
    const std::uint8_t* rec = bytes.data() + r * record_len;
    // For CIFAR-100 the second label byte is the fine label.
    labels[cursor] = static_cast<int>(rec[label_bytes - 1]);
    const std::uint8_t* px = rec + label_bytes;
    for (std::size_t f = 0; f < kImageBytes; ++f)
      inputs(f, cursor) = static_cast<double>(px[f]);
    ++cursor;
  }
}

void normalize_by_train_channels(Dataset& train, Dataset& test) {
  train.channel_mean.assign(train.channels, 0.0);
  train.channel_std.assign(train.channels, 0.0);
  const std::size_t n = train.size();
  for (std::size_t c = 0; c < train.channels; ++c) {
    double sum = 0.0;
    for (std::size_t f = c * kChannelPixels; f < (c + 1) * kChannelPixels; ++f)
      for (std::size_t j = 0; j < n; ++j) sum += train.inputs(f, j);
    const double mean = sum / static_cast<double>(kChannelPixels * n);
    double sq = 0.0;
    for (std::size_t f = c * kChannelPixels; f < (c + 1) * kChannelPixels; ++f)
      for (std::size_t j = 0; j < n; ++j) {
        const double d = train.inputs(f, j) - mean;
        sq += d * d;
      }
    const double std = std::sqrt(sq / static_cast<double>(kChannelPixels * n));
    train.channel_mean[c] = mean;
    train.channel_std[c] = std;
  }
  test.channel_mean = train.channel_mean;
  test.channel_std = train.channel_std;

  for (Dataset* ds : {&train, &test})
    for (std::size_t c = 0; c < ds->channels; ++c) {
      const double mean = ds->channel_mean[c];
      const double inv = 1.0 / ds->channel_std[c];
      for (std::size_t f = c * kChannelPixels; f < (c + 1) * kChannelPixels; ++f)
        for (std::size_t j = 0; j < ds->size(); ++j)
          ds->inputs(f, j) = (ds->inputs(f, j) - mean) * inv;
    }
}

Dataset image_dataset(std::size_t n, std::size_t classes) {
  Dataset ds;
  ds.inputs = Matrix(kImageBytes, n);
  ds.labels.assign(n, 0);
  ds.classes = classes;
  ds.channels = 3;
  ds.height = 32;
  ds.width = 32;
  return ds;
}

}  // namespace

DatasetPair load_cifar10(const std::string& dir) {
  DatasetPair pair;
  pair.train = image_dataset(50000, 10);
  pair.test = image_dataset(10000, 10);

  std::size_t cursor = 0;
  for (int b = 1; b <= 5; ++b)
    append_records(dir + "/data_batch_" + std::to_string(b) + ".bin", 10000, 1,
                   pair.train.inputs, pair.train.labels, cursor);
  cursor = 0;
  append_records(dir + "/test_batch.bin", 10000, 1, pair.test.inputs, pair.test.labels, cursor);

  normalize_by_train_channels(pair.train, pair.test);
  return pair;
}

DatasetPair load_cifar100(const std::string& dir) {
  DatasetPair pair;
  pair.train = image_dataset(50000, 100);
  pair.test = image_dataset(10000, 100);

  std::size_t cursor = 0;
  append_records(dir + "/train.bin", 50000, 2, pair.train.inputs, pair.train.labels, cursor);
  cursor = 0;
  append_records(dir + "/test.bin", 10000, 2, pair.test.inputs, pair.test.labels, cursor);

  normalize_by_train_channels(pair.train, pair.test);
  return pair;
}

namespace {

std::vector<std::vector<double>> draw_centers(const SyntheticSpec& spec, Rng& rng) {
  std::vector<std::vector<double>> centers(spec.classes, std::vector<double>(spec.dim, 0.0));
  for (auto& center : centers) {
    double norm2 = 0.0;
    for (double& x : center) {
      x = rng.normal(0.0, 1.0);
      norm2 += x * x;
    }
    const double scale = spec.separation / std::sqrt(norm2);
    for (double& x : center) x *= scale;
  }
  return centers;
}

Dataset sample_blobs(const std::vector<std::vector<double>>& centers, std::size_t per_class,
                     std::size_t dim, Rng& rng) {
  const std::size_t n = centers.size() * per_class;
  Dataset ds;
  ds.inputs = Matrix(dim, n);
  ds.labels.assign(n, 0);
  ds.classes = centers.size();
  std::size_t col = 0;
  for (std::size_t k = 0; k < centers.size(); ++k)
    for (std::size_t s = 0; s < per_class; ++s) {
      for (std::size_t f = 0; f < dim; ++f)
        ds.inputs(f, col) = centers[k][f] + rng.normal(0.0, 1.0);
      ds.labels[col] = static_cast<int>(k);
      ++col;
    }
  return ds;
}

void validate_synthetic(const SyntheticSpec& spec) {
  if (spec.classes < 2) throw std::invalid_argument("make_synthetic: needs >= 2 classes");
  if (spec.dim == 0) throw std::invalid_argument("make_synthetic: zero dimension");
  if (spec.samples_per_class == 0)
    throw std::invalid_argument("make_synthetic: zero samples per class");
  if (spec.separation < 0.0) throw std::invalid_argument("make_synthetic: negative separation");
}

}  // namespace

Dataset make_synthetic(const SyntheticSpec& spec, Rng& rng) {
  validate_synthetic(spec);
  const auto centers = draw_centers(spec, rng);
  return sample_blobs(centers, spec.samples_per_class, spec.dim, rng);
}

DatasetPair make_synthetic_split(const SyntheticSpec& spec, std::size_t test_per_class,
                                 Rng& rng) {
  validate_synthetic(spec);
  if (test_per_class == 0)
    throw std::invalid_argument("make_synthetic_split: zero test samples per class");
  const auto centers = draw_centers(spec, rng);
  DatasetPair pair;
  pair.train = sample_blobs(centers, spec.samples_per_class, spec.dim, rng);
  pair.test = sample_blobs(centers, test_per_class, spec.dim, rng);
  return pair;
}

Matrix augment_batch(const Matrix& batch, std::size_t channels, std::size_t height,
                     std::size_t width, Rng& rng) {
  if (batch.rows() != channels * height * width)
    throw std::invalid_argument("augment_batch: " + batch.shape_str() +
                                " does not match image geometry");
  constexpr std::size_t pad = 4;
  Matrix out(batch.rows(), batch.cols());
  for (std::size_t j = 0; j < batch.cols(); ++j) {
    const std::size_t dy = static_cast<std::size_t>(rng.below(2 * pad + 1));
    const std::size_t dx = static_cast<std::size_t>(rng.below(2 * pad + 1));
    const bool flip = rng.below(2) == 1;
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) {
          // Position in the zero-padded source image.
          const std::ptrdiff_t sy =
              static_cast<std::ptrdiff_t>(y + dy) - static_cast<std::ptrdiff_t>(pad);
          std::ptrdiff_t sx =
              static_cast<std::ptrdiff_t>(x + dx) - static_cast<std::ptrdiff_t>(pad);
          if (flip && sx >= 0 && sx < static_cast<std::ptrdiff_t>(width))
            sx = static_cast<std::ptrdiff_t>(width) - 1 - sx;
          double v = 0.0;
          if (sy >= 0 && sy < static_cast<std::ptrdiff_t>(height) && sx >= 0 &&
              sx < static_cast<std::ptrdiff_t>(width))
            v = batch((c * height + static_cast<std::size_t>(sy)) * width +
                          static_cast<std::size_t>(sx),
                      j);
          out((c * height + y) * width + x, j) = v;
        }
  }
  return out;
}

}  // namespace lcw
