#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lcwnet/matrix.hpp"
#include "lcwnet/network.hpp"
#include "lcwnet/rng.hpp"
#include "lcwnet/stats.hpp"

namespace lcw {

// ---------------------------------------------------------------------------
// Activation shift

struct ShiftRow {
  double predicted_mean = 0.0;  // ||w|| ||mu|| cos(angle(w, mu)), 0 when ||mu|| = 0
  double empirical_mean = 0.0;  // mean of w . a over the sample columns
  double angle = 0.0;           // radians in [0, pi], vs the mean vector
  double weight_norm = 0.0;
  double standard_error = 0.0;  // of the empirical mean
};

struct ShiftReport {
  std::vector<ShiftRow> rows;
  double max_abs_deviation = 0.0;   // max |predicted - empirical|
  std::size_t rows_within_4se = 0;  // |predicted - empirical| <= 4 SE
};

/// Per-neuron predicted vs empirical preactivation mean: rows of W against
/// the sample columns of A, with mean_vec the true mean of the activation
/// distribution.
ShiftReport measure_shift(const Matrix& W, const Matrix& A, std::span<const double> mean_vec);

/// Prediction for an activation distribution with mean gamma * 1_m:
/// |gamma| sqrt(m) ||w|| cos(angle(w, 1_m)).
double shift_prediction_constant_mean(std::span<const double> w, double gamma);

/// Angle via arccos of the normalized dot product, clamped to [-1, 1].
double angle_between(std::span<const double> a, std::span<const double> b);

// ---------------------------------------------------------------------------
// Variance propagation (forward and backward)

struct VarianceCheckRow {
  double empirical_mean = 0.0;
  double mean_se = 0.0;
  double empirical_var = 0.0;
  double var_se = 0.0;
  double predicted_var = 0.0;
  bool mean_pass = false;  // |empirical_mean| <= 4 SE
  bool var_pass = false;   // |empirical_var - predicted_var| <= 4 SE
};

struct VarianceCheckResult {
  std::vector<VarianceCheckRow> rows;
  bool pass = false;
};

/// Forward variance law for zero-sum weights: draws a with i.i.d. components
/// of mean gamma and standard deviation sigma, and checks E(w.a) = 0 and
/// V(w.a) = sigma^2 ||w||^2 for each row of w_rows, within 4 standard errors.
/// Every row must have positive norm.
VarianceCheckResult verify_forward_variance(const Matrix& w_rows, double gamma, double sigma,
                                 std::size_t n_samples, Rng& rng);

/// Backward variance law: draws grad_z ~ N(0, sigma^2 I) and checks for every
/// column j of W that V((W^T grad_z)_j) = sigma^2 ||col_j||^2 within 4 SE.
VarianceCheckResult verify_backward_variance(const Matrix& W, double sigma, std::size_t n_samples, Rng& rng);

/// Sum of squared row norms and sum of squared column norms (compensated
/// accumulation); equal for any matrix since both count every entry once.
std::pair<double, double> row_col_amplification(const Matrix& W);

// ---------------------------------------------------------------------------
// Activation-layer variance amplification

enum class PhiActivation { sigmoid, relu, identity };

struct PhiEstimate {
  PhiActivation kind = PhiActivation::identity;
  double sigma_z = 1.0;
  std::size_t n_samples = 0;
  double phi_fw = 0.0;  // V(f(z)) / sigma_z^2
  double phi_bw = 0.0;  // V(f'(z) grad_a) / V(grad_a)
  double se_fw = 0.0;
  double se_bw = 0.0;

  // Amplification of the standard deviation rather than the variance.
  double std_ratio_fw() const;
  double std_ratio_bw() const;
};

/// Monte Carlo estimate with z ~ N(0, sigma_z^2) and grad_a ~ N(0, 1) drawn
/// independently. Requires sigma_z > 0 and n_samples >= 1e5.
PhiEstimate measure_phi(PhiActivation kind, double sigma_z, std::size_t n_samples, Rng& rng);

// ---------------------------------------------------------------------------
// Layer profiles

struct LayerProfileRow {
  std::size_t layer = 0;  // 1-based ordinal among dense layers
  SummaryStats preact;
  SummaryStats preact_grad;
};

/// One forward + backward on the batch; per dense layer, summary statistics
/// of the preactivation and of the loss gradient with respect to it. When
/// labels is null, random labels drive the cross-entropy loss.
std::vector<LayerProfileRow> layer_profile(Network& net, const Matrix& batch,
                                           const std::vector<int>* labels, Rng& rng);

struct NeuronQuantileRow {
  std::size_t layer = 0;   // 1-based ordinal among activation layers
  std::size_t neuron = 0;  // 0-based
  SummaryStats stats;
};

/// Per-neuron activation statistics over the batch for the selected
/// activation layers (1-based ordinals) and the first neuron_count neurons.
std::vector<NeuronQuantileRow> activation_quantiles(Network& net, const Matrix& batch,
                                                    std::span<const std::size_t> layer_indices,
                                                    std::size_t neuron_count);

// ---------------------------------------------------------------------------
// Verdicts

struct Verdict {
  std::string name;
  double expected = 0.0;
  double observed = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Runs the full battery: shift predictions in the Fig-1 regime, the zero-sum
/// null shift, both variance laws with the kappa^2 rescaling property, the
/// row/column amplification identity, the ReLU variance ratios, and the
/// sigmoid amplification table.
std::vector<Verdict> run_verification_battery(std::uint64_t seed, std::size_t n_samples);

std::string verdicts_to_json(const std::vector<Verdict>& verdicts);

// CSV emission (context columns + value, one statistic per row).
std::string layer_profile_csv(const std::vector<LayerProfileRow>& rows);
std::string quantiles_csv(const std::vector<NeuronQuantileRow>& rows);
std::string shift_report_csv(const ShiftReport& report);

}  // namespace lcw
