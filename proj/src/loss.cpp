#include "lcwnet/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace lcw {

Matrix softmax(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (std::size_t j = 0; j < logits.cols(); ++j) {
    double mx = logits(0, j);
    for (std::size_t i = 1; i < logits.rows(); ++i) mx = std::max(mx, logits(i, j));
    double denom = 0.0;
    for (std::size_t i = 0; i < logits.rows(); ++i) denom += std::exp(logits(i, j) - mx);
    for (std::size_t i = 0; i < logits.rows(); ++i)
      p(i, j) = std::exp(logits(i, j) - mx) / denom;
  }
  return p;
}

LossResult softmax_xent_loss(const Matrix& logits, const std::vector<int>& labels) {
  const std::size_t classes = logits.rows();
  const std::size_t batch = logits.cols();
  if (batch == 0) throw std::invalid_argument("softmax_xent_loss: empty batch");
  if (labels.size() != batch)
    throw std::invalid_argument("softmax_xent_loss: " + std::to_string(labels.size()) +
                                " labels for batch of " + std::to_string(batch));
  for (int y : labels)
    if (y < 0 || static_cast<std::size_t>(y) >= classes)
      throw std::invalid_argument("softmax_xent_loss: label " + std::to_string(y) +
                                  " outside [0, " + std::to_string(classes) + ")");

  LossResult out;
  out.grad_logits = Matrix(classes, batch);
  double total = 0.0;
  for (std::size_t j = 0; j < batch; ++j) {
    double mx = logits(0, j);
    for (std::size_t i = 1; i < classes; ++i) mx = std::max(mx, logits(i, j));
    double denom = 0.0;
    for (std::size_t i = 0; i < classes; ++i) denom += std::exp(logits(i, j) - mx);
    const double lse = mx + std::log(denom);
    total += lse - logits(static_cast<std::size_t>(labels[j]), j);
    for (std::size_t i = 0; i < classes; ++i) {
      double g = std::exp(logits(i, j) - lse);
      if (i == static_cast<std::size_t>(labels[j])) g -= 1.0;
      out.grad_logits(i, j) = g / static_cast<double>(batch);
    }
  }
  out.loss = total / static_cast<double>(batch);
  return out;
}

double accuracy(const Matrix& logits, const std::vector<int>& labels) {
  if (labels.size() != logits.cols())
    throw std::invalid_argument("accuracy: label count does not match batch");
  if (labels.empty()) throw std::invalid_argument("accuracy: empty batch");
  std::size_t hits = 0;
  for (std::size_t j = 0; j < logits.cols(); ++j) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < logits.rows(); ++i)
      if (logits(i, j) > logits(best, j)) best = i;
    if (best == static_cast<std::size_t>(labels[j])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

}  // namespace lcw
