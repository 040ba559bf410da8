#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lcwnet/matrix.hpp"
#include "lcwnet/rng.hpp"

namespace lcw {

/// Labeled samples as columns of a feature matrix. Image datasets keep their
/// channel geometry (for augmentation) and the normalization statistics that
/// were applied.
struct Dataset {
  Matrix inputs;  // features x n
  std::vector<int> labels;
  std::size_t classes = 0;

  // set for image data; zero otherwise
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;

  std::vector<double> channel_mean;
  std::vector<double> channel_std;

  std::size_t size() const { return labels.size(); }
};

struct DatasetPair {
  Dataset train;
  Dataset test;
};

/// Reads the CIFAR-10 binary batches (data_batch_1..5.bin, test_batch.bin):
/// per record one label byte followed by 3072 pixel bytes (1024 per channel,
/// R then G then B, row-major 32x32), 10000 records per file. Both splits are
/// normalized by the training split's channel means and standard deviations.
DatasetPair load_cifar10(const std::string& dir);

/// CIFAR-100 variant: train.bin / test.bin with two label bytes per record
/// (coarse then fine); the fine label is used.
DatasetPair load_cifar100(const std::string& dir);

struct SyntheticSpec {
  std::size_t classes = 2;
  std::size_t dim = 2;
  std::size_t samples_per_class = 100;
  double separation = 1.0;  // distance of each class center from the origin
};

/// Gaussian blobs: class centers are random unit vectors scaled by
/// `separation`, samples add unit-variance noise per coordinate.
Dataset make_synthetic(const SyntheticSpec& spec, Rng& rng);

/// Train/test pair drawn around the same class centers.
DatasetPair make_synthetic_split(const SyntheticSpec& spec, std::size_t test_per_class,
                                 Rng& rng);

/// Standard image augmentation: zero-pad by 4, random crop back to size, and
/// horizontal flip with probability 1/2, per sample.
Matrix augment_batch(const Matrix& batch, std::size_t channels, std::size_t height,
                     std::size_t width, Rng& rng);

}  // namespace lcw
