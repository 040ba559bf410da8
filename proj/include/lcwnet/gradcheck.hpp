#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lcwnet/network.hpp"

namespace lcw {

/// ||a - b|| / (||a|| + ||b||); zero when both norms are below 1e-12.
double gradient_rel_error(std::span<const double> analytic, std::span<const double> numeric);

/// Central difference (f(x+h) - f(x-h)) / 2h for every entry of buf.
/// `recompute` must re-evaluate the scalar objective from current buffers.
std::vector<double> central_difference(std::vector<double>& buf,
                                       const std::function<double()>& recompute, double h);

/// Worst relative error between analytic and central-difference gradients of
/// net.loss over every parameter slot and the input batch.
double network_grad_max_rel_error(Network& net, const Matrix& x, const std::vector<int>& labels,
                                  double h = 1e-5);

struct GradCheckResult {
  std::string name;
  double max_rel_error = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

/// Finite-difference battery over every layer type (dense and conv in both
/// weight modes, sigmoid, relu, batch norm, softmax cross-entropy) plus a
/// composed 3-layer MLP.
std::vector<GradCheckResult> run_gradcheck_suite(std::uint64_t seed);

}  // namespace lcw
