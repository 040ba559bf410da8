#include "lcwnet/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "lcwnet/basis.hpp"
#include "lcwnet/layers.hpp"

namespace lcw {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// Streaming raw moments up to order four of one scalar stream.
struct Moments {
  std::size_t n = 0;
  double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;

  void add(double x) {
    ++n;
    const double x2 = x * x;
    s1 += x;
    s2 += x2;
    s3 += x2 * x;
    s4 += x2 * x2;
  }

  double mean() const { return s1 / static_cast<double>(n); }

  double variance() const {
    const double m = mean();
    return s2 / static_cast<double>(n) - m * m;
  }

  /// Central fourth moment, from raw moments.
  double m4() const {
    const double m = mean();
    const double dn = static_cast<double>(n);
    return s4 / dn - 4.0 * m * s3 / dn + 6.0 * m * m * s2 / dn - 3.0 * m * m * m * m;
  }

  double mean_se() const { return std::sqrt(variance() / static_cast<double>(n)); }

  double var_se() const {
    const double v = variance();
    const double spread = m4() - v * v;
    return std::sqrt(std::max(spread, 0.0) / static_cast<double>(n));
  }
};

constexpr std::size_t kChunk = 4096;

}  // namespace

// ---------------------------------------------------------------------------
// Activation shift

double angle_between(std::span<const double> a, std::span<const double> b) {
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0)
    throw std::invalid_argument("angle_between: zero-length vector");
  const double c = std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
  return std::acos(c);
}

double shift_prediction_constant_mean(std::span<const double> w, double gamma) {
  const std::size_t m = w.size();
  if (gamma == 0.0) return 0.0;
  std::vector<double> ones(m, 1.0);
  const double theta = angle_between(w, ones);
  return std::fabs(gamma) * std::sqrt(static_cast<double>(m)) * norm(w) * std::cos(theta);
}

ShiftReport measure_shift(const Matrix& W, const Matrix& A, std::span<const double> mean_vec) {
  if (W.cols() != A.rows())
    throw std::invalid_argument("measure_shift: W " + W.shape_str() + " vs A " + A.shape_str());
  if (mean_vec.size() != W.cols())
    throw std::invalid_argument("measure_shift: mean vector length " +
                                std::to_string(mean_vec.size()) + " does not match " +
                                std::to_string(W.cols()));
  const std::size_t m = W.cols();
  const std::size_t samples = A.cols();
  if (samples == 0) throw std::invalid_argument("measure_shift: no sample columns");

  const double mu_norm = norm(mean_vec);
  const Matrix Z = matmul(W, A);

  ShiftReport report;
  report.rows.reserve(W.rows());
  for (std::size_t i = 0; i < W.rows(); ++i) {
    ShiftRow row;
    const std::span<const double> w(W.row_ptr(i), m);
    row.weight_norm = norm(w);
    if (mu_norm > 0.0 && row.weight_norm > 0.0) {
      row.angle = angle_between(w, mean_vec);
      row.predicted_mean = row.weight_norm * mu_norm * std::cos(row.angle);
    } else {
      row.angle = 0.0;
      row.predicted_mean = 0.0;
    }

    Moments mom;
    for (std::size_t j = 0; j < samples; ++j) mom.add(Z(i, j));
    row.empirical_mean = mom.mean();
    row.standard_error = mom.mean_se();

    const double dev = std::fabs(row.predicted_mean - row.empirical_mean);
    report.max_abs_deviation = std::max(report.max_abs_deviation, dev);
    if (dev <= 4.0 * row.standard_error) ++report.rows_within_4se;
    report.rows.push_back(row);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Variance propagation

VarianceCheckResult verify_forward_variance(const Matrix& w_rows, double gamma, double sigma,
                                 std::size_t n_samples, Rng& rng) {
  if (!(sigma > 0.0)) throw std::invalid_argument("verify_forward_variance: requires sigma > 0");
  if (n_samples == 0) throw std::invalid_argument("verify_forward_variance: requires samples");
  const std::size_t m = w_rows.cols();
  for (std::size_t i = 0; i < w_rows.rows(); ++i)
    if (norm(std::span<const double>(w_rows.row_ptr(i), m)) == 0.0)
      throw std::invalid_argument("verify_forward_variance: row " + std::to_string(i) +
                                  " has zero norm (requires ||w|| > 0)");

  std::vector<Moments> moments(w_rows.rows());
  std::size_t done = 0;
  while (done < n_samples) {
    const std::size_t c = std::min(kChunk, n_samples - done);
    const Matrix A = rand_normal(rng, gamma, sigma, m, c);
    const Matrix Z = matmul(w_rows, A);
    for (std::size_t i = 0; i < w_rows.rows(); ++i)
      for (std::size_t j = 0; j < c; ++j) moments[i].add(Z(i, j));
    done += c;
  }

  VarianceCheckResult result;
  result.pass = true;
  for (std::size_t i = 0; i < w_rows.rows(); ++i) {
    VarianceCheckRow row;
    const std::span<const double> w(w_rows.row_ptr(i), m);
    row.predicted_var = sigma * sigma * dot(w, w);
    row.empirical_mean = moments[i].mean();
    row.mean_se = moments[i].mean_se();
    row.empirical_var = moments[i].variance();
    row.var_se = moments[i].var_se();
    row.mean_pass = std::fabs(row.empirical_mean) <= 4.0 * row.mean_se;
    row.var_pass = std::fabs(row.empirical_var - row.predicted_var) <= 4.0 * row.var_se;
    result.pass = result.pass && row.mean_pass && row.var_pass;
    result.rows.push_back(row);
  }
  return result;
}

VarianceCheckResult verify_backward_variance(const Matrix& W, double sigma, std::size_t n_samples, Rng& rng) {
  if (!(sigma > 0.0)) throw std::invalid_argument("verify_backward_variance: requires sigma > 0");
  if (n_samples == 0) throw std::invalid_argument("verify_backward_variance: requires samples");

  const Matrix Wt = W.transposed();  // rows of Wt are columns of W
  std::vector<Moments> moments(Wt.rows());
  std::size_t done = 0;
  while (done < n_samples) {
    const std::size_t c = std::min(kChunk, n_samples - done);
    const Matrix G = rand_normal(rng, 0.0, sigma, W.rows(), c);
    const Matrix GA = matmul(Wt, G);
    for (std::size_t j = 0; j < Wt.rows(); ++j)
      for (std::size_t k = 0; k < c; ++k) moments[j].add(GA(j, k));
    done += c;
  }

  VarianceCheckResult result;
  result.pass = true;
  for (std::size_t j = 0; j < Wt.rows(); ++j) {
    VarianceCheckRow row;
    const std::span<const double> col(Wt.row_ptr(j), Wt.cols());
    row.predicted_var = sigma * sigma * dot(col, col);
    row.empirical_mean = moments[j].mean();
    row.mean_se = moments[j].mean_se();
    row.empirical_var = moments[j].variance();
    row.var_se = moments[j].var_se();
    row.mean_pass = std::fabs(row.empirical_mean) <= 4.0 * row.mean_se;
    row.var_pass = std::fabs(row.empirical_var - row.predicted_var) <= 4.0 * row.var_se;
    result.pass = result.pass && row.mean_pass && row.var_pass;
    result.rows.push_back(row);
  }
  return result;
}

std::pair<double, double> row_col_amplification(const Matrix& W) {
  // Kahan-compensated sums keep the identity exact to ~1e-15 even at 512x512.
  double row_sum = 0.0, row_c = 0.0;
  double col_sum = 0.0, col_c = 0.0;
  for (std::size_t i = 0; i < W.rows(); ++i)
    for (std::size_t j = 0; j < W.cols(); ++j) {
      const double sq = W(i, j) * W(i, j);
      double y = sq - row_c;
      double t = row_sum + y;
      row_c = (t - row_sum) - y;
      row_sum = t;
    }
  for (std::size_t j = 0; j < W.cols(); ++j)
    for (std::size_t i = 0; i < W.rows(); ++i) {
      const double sq = W(i, j) * W(i, j);
      double y = sq - col_c;
      double t = col_sum + y;
      col_c = (t - col_sum) - y;
      col_sum = t;
    }
  return {row_sum, col_sum};
}

// ---------------------------------------------------------------------------
// Phi estimation

double PhiEstimate::std_ratio_fw() const { return std::sqrt(phi_fw); }
double PhiEstimate::std_ratio_bw() const { return std::sqrt(phi_bw); }

PhiEstimate measure_phi(PhiActivation kind, double sigma_z, std::size_t n_samples, Rng& rng) {
  if (!(sigma_z > 0.0)) throw std::invalid_argument("measure_phi: requires sigma_z > 0");
  if (n_samples < 100000)
    throw std::invalid_argument("measure_phi: requires at least 1e5 samples");

  Moments fwd, bwd;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double z = rng.normal(0.0, sigma_z);
    const double g = rng.normal(0.0, 1.0);
    double a = 0.0, fp = 0.0;
    switch (kind) {
      case PhiActivation::sigmoid: {
        const double s = sigmoid_scalar(z);
        a = s;
        fp = s * (1.0 - s);
        break;
      }
      case PhiActivation::relu:
        a = z > 0.0 ? z : 0.0;
        fp = z > 0.0 ? 1.0 : 0.0;
        break;
      case PhiActivation::identity:
        a = z;
        fp = 1.0;
        break;
    }
    fwd.add(a);
    bwd.add(fp * g);
  }

  PhiEstimate est;
  est.kind = kind;
  est.sigma_z = sigma_z;
  est.n_samples = n_samples;
  const double vz = sigma_z * sigma_z;
  est.phi_fw = fwd.variance() / vz;
  est.se_fw = fwd.var_se() / vz;
  est.phi_bw = bwd.variance();
  est.se_bw = bwd.var_se();
  return est;
}

// ---------------------------------------------------------------------------
// Layer profiles

std::vector<LayerProfileRow> layer_profile(Network& net, const Matrix& batch,
                                           const std::vector<int>* labels, Rng& rng) {
  if (batch.cols() == 0) throw std::invalid_argument("layer_profile: empty batch");

  const Matrix& logits = net.forward(batch);
  std::vector<int> used_labels;
  if (labels != nullptr) {
    used_labels = *labels;
  } else {
    used_labels.resize(batch.cols());
    for (auto& y : used_labels)
      y = static_cast<int>(rng.below(static_cast<std::uint64_t>(logits.rows())));
  }
  LossResult res = softmax_xent_loss(logits, used_labels);
  net.zero_grad();
  net.backward(res.grad_logits);

  std::vector<LayerProfileRow> rows;
  std::size_t ordinal = 0;
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (net.layer(i).kind() != "dense") continue;
    ++ordinal;
    LayerProfileRow row;
    row.layer = ordinal;
    row.preact = summarize(net.layer_output(i).data());
    row.preact_grad = summarize(net.layer_output_grad(i).data());
    rows.push_back(row);
  }
  return rows;
}

std::vector<NeuronQuantileRow> activation_quantiles(Network& net, const Matrix& batch,
                                                    std::span<const std::size_t> layer_indices,
                                                    std::size_t neuron_count) {
  if (batch.cols() == 0) throw std::invalid_argument("activation_quantiles: empty batch");

  std::vector<std::size_t> activation_positions;
  for (std::size_t i = 0; i < net.size(); ++i) {
    const std::string k = net.layer(i).kind();
    if (k == "sigmoid" || k == "relu") activation_positions.push_back(i);
  }
  for (std::size_t idx : layer_indices)
    if (idx == 0 || idx > activation_positions.size())
      throw std::invalid_argument("activation_quantiles: layer index " + std::to_string(idx) +
                                  " out of range [1, " +
                                  std::to_string(activation_positions.size()) + "]");

  net.forward(batch);

  std::vector<NeuronQuantileRow> rows;
  for (std::size_t idx : layer_indices) {
    const Matrix& act = net.layer_output(activation_positions[idx - 1]);
    const std::size_t neurons = std::min(neuron_count, act.rows());
    for (std::size_t n = 0; n < neurons; ++n) {
      NeuronQuantileRow row;
      row.layer = idx;
      row.neuron = n;
      row.stats = summarize(std::span<const double>(act.row_ptr(n), act.cols()));
      rows.push_back(row);
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Composed verification battery

std::vector<Verdict> run_verification_battery(std::uint64_t seed, std::size_t n_samples) {
  std::vector<Verdict> verdicts;
  auto add = [&](const std::string& name, double expected, double observed, double tol,
                 bool pass) {
    verdicts.push_back({name, expected, observed, tol, pass});
  };

  // Shift predictions in the stripe-pattern regime: W ~ U(-1,1), A ~ U(0,1), gamma 0.5.
  {
    Rng rng(seed);
    const Matrix W = rand_uniform(rng, -1.0, 1.0, 100, 100);
    const Matrix A = rand_uniform(rng, 0.0, 1.0, 100, 100);
    const std::vector<double> mu(100, 0.5);
    const ShiftReport rep = measure_shift(W, A, mu);
    add("shift_prediction_rows_within_4se", 99.0, static_cast<double>(rep.rows_within_4se),
        1.0, rep.rows_within_4se >= 99);

    // Same regime with zero-sum rows: predictions and empirical means vanish.
    auto basis = LcwBasis::shared(100);
    Matrix Wlc(100, 100);
    for (std::size_t i = 0; i < 100; ++i) {
      std::vector<double> v(99);
      for (auto& x : v) x = rng.uniform(-1.0, 1.0);
      const auto w = basis->lift(v);
      for (std::size_t j = 0; j < 100; ++j) Wlc(i, j) = w[j];
    }
    const ShiftReport lcrep = measure_shift(Wlc, A, mu);
    std::size_t null_rows = 0;
    for (const auto& row : lcrep.rows)
      if (std::fabs(row.empirical_mean) <= 4.0 * row.standard_error) ++null_rows;
    add("zero_sum_null_shift_rows_within_4se", 100.0, static_cast<double>(null_rows), 0.0,
        null_rows == 100);
  }

  // Forward / backward variance laws at m = 64.
  {
    Rng rng(seed + 1);
    auto basis = LcwBasis::shared(64);
    Matrix w_rows(4, 64);
    for (std::size_t i = 0; i < w_rows.rows(); ++i) {
      std::vector<double> v(63);
      for (auto& x : v) x = rng.uniform(-1.0, 1.0);
      const auto w = basis->lift(v);
      for (std::size_t j = 0; j < 64; ++j) w_rows(i, j) = w[j];
    }
    const auto p4 = verify_forward_variance(w_rows, 0.5, 1.0, n_samples, rng);
    double worst_ratio = 1.0;
    for (const auto& row : p4.rows) {
      const double r = row.empirical_var / row.predicted_var;
      if (std::fabs(r - 1.0) > std::fabs(worst_ratio - 1.0)) worst_ratio = r;
    }
    add("forward_variance_ratio", 1.0, worst_ratio, 0.02, p4.pass);

    // kappa rescaling multiplies the variance by kappa^2.
    const double kappa = 3.0;
    Matrix scaled = w_rows;
    scaled.scale(kappa);
    const auto p4s = verify_forward_variance(scaled, 0.5, 1.0, n_samples, rng);
    const double kappa_ratio = p4s.rows[0].empirical_var / p4.rows[0].empirical_var;
    add("kappa_squared_rescaling", kappa * kappa, kappa_ratio, 0.02 * kappa * kappa,
        std::fabs(kappa_ratio - kappa * kappa) <= 0.02 * kappa * kappa);

    const Matrix W = rand_uniform(rng, -1.0, 1.0, 64, 64);
    const auto p5 = verify_backward_variance(W, 1.0, n_samples, rng);
    double worst5 = 1.0;
    for (const auto& row : p5.rows) {
      const double r = row.empirical_var / row.predicted_var;
      if (std::fabs(r - 1.0) > std::fabs(worst5 - 1.0)) worst5 = r;
    }
    add("backward_variance_ratio", 1.0, worst5, 0.02, p5.pass);

    const auto [eta, xi] = row_col_amplification(W);
    const double rel = std::fabs(eta - xi) / eta;
    add("eta_equals_xi_identity", 0.0, rel, 1e-12, rel < 1e-12);
  }

  // Activation amplification rates.
  {
    Rng rng(seed + 2);
    const auto relu = measure_phi(PhiActivation::relu, 1.0, n_samples, rng);
    const double relu_fw_expected = 0.5 * (1.0 - 1.0 / std::numbers::pi);
    add("relu_phi_fw", relu_fw_expected, relu.phi_fw, 0.005,
        std::fabs(relu.phi_fw - relu_fw_expected) <= 0.005);
    add("relu_phi_bw", 0.5, relu.phi_bw, 0.005, std::fabs(relu.phi_bw - 0.5) <= 0.005);

    // The sigmoid table lists amplification of the standard deviation.
    const double table[3][3] = {{0.5, 0.236, 0.237}, {1.0, 0.208, 0.211}, {2.0, 0.157, 0.170}};
    for (const auto& entry : table) {
      const auto est = measure_phi(PhiActivation::sigmoid, entry[0], n_samples, rng);
      std::ostringstream name;
      name << "sigmoid_std_amplification_sigma_" << entry[0];
      add(name.str() + "_fw", entry[1], est.std_ratio_fw(), 0.01,
          std::fabs(est.std_ratio_fw() - entry[1]) <= 0.01);
      add(name.str() + "_bw", entry[2], est.std_ratio_bw(), 0.01,
          std::fabs(est.std_ratio_bw() - entry[2]) <= 0.01);
    }

    const auto ident = measure_phi(PhiActivation::identity, 1.0, n_samples, rng);
    add("identity_phi_fw_sanity", 1.0, ident.phi_fw, 0.01,
        std::fabs(ident.phi_fw - 1.0) <= 0.01);
    add("identity_phi_bw_sanity", 1.0, ident.phi_bw, 0.01,
        std::fabs(ident.phi_bw - 1.0) <= 0.01);
  }

  return verdicts;
}

std::string verdicts_to_json(const std::vector<Verdict>& verdicts) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& v : verdicts) {
    doc.push_back({{"name", v.name},
                   {"expected", v.expected},
                   {"observed", v.observed},
                   {"tolerance", v.tolerance},
                   {"pass", v.pass}});
  }
  return doc.dump(2);
}

// ---------------------------------------------------------------------------
// CSV emission

namespace {

void stat_rows(std::ostringstream& out, const std::string& context, const SummaryStats& st) {
  out << context << ",mean," << st.mean << "\n";
  out << context << ",variance," << st.variance << "\n";
  out << context << ",q01," << st.q01 << "\n";
  out << context << ",q25," << st.q25 << "\n";
  out << context << ",q50," << st.q50 << "\n";
  out << context << ",q75," << st.q75 << "\n";
  out << context << ",q99," << st.q99 << "\n";
}

}  // namespace

std::string layer_profile_csv(const std::vector<LayerProfileRow>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << "layer,signal,stat,value\n";
  for (const auto& row : rows) {
    stat_rows(out, std::to_string(row.layer) + ",preactivation", row.preact);
    stat_rows(out, std::to_string(row.layer) + ",preactivation_gradient", row.preact_grad);
  }
  return out.str();
}

std::string quantiles_csv(const std::vector<NeuronQuantileRow>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << "layer,neuron,stat,value\n";
  for (const auto& row : rows)
    stat_rows(out, std::to_string(row.layer) + "," + std::to_string(row.neuron), row.stats);
  return out.str();
}

std::string shift_report_csv(const ShiftReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "row,weight_norm,angle,predicted_mean,empirical_mean,standard_error\n";
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& r = report.rows[i];
    out << i << "," << r.weight_norm << "," << r.angle << "," << r.predicted_mean << ","
        << r.empirical_mean << "," << r.standard_error << "\n";
  }
  return out.str();
}

}  // namespace lcw
