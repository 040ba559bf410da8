#pragma once

#include <vector>

#include "lcwnet/matrix.hpp"

namespace lcw {

struct LossResult {
  double loss = 0.0;
  Matrix grad_logits;  // same shape as logits, already divided by batch size
};

/// Mean cross-entropy of column-wise softmax over the batch, log-sum-exp
/// stabilized. Gradient is (softmax - onehot) / batch.
LossResult softmax_xent_loss(const Matrix& logits, const std::vector<int>& labels);

/// Column-wise softmax probabilities (stabilized).
Matrix softmax(const Matrix& logits);

/// Fraction of columns whose argmax matches the label.
double accuracy(const Matrix& logits, const std::vector<int>& labels);

}  // namespace lcw
