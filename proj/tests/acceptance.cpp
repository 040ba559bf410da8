// Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "lcwnet/basis.hpp"
#include "lcwnet/diagnostics.hpp"
#include "lcwnet/gradcheck.hpp"
#include "lcwnet/init.hpp"
#include "lcwnet/trainer.hpp"

using namespace lcw;

namespace {

struct Criterion {
  int id;
  std::string name;
  bool pass;
  double seconds;
  double time_limit;  // 0: no stated bound
  std::string detail;
};

std::vector<Criterion> g_results;

void run(int id, const std::string& name, double time_limit,
         const std::function<bool(std::string&)>& body) {
  std::string detail;
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (time_limit > 0.0 && seconds >= time_limit) {
    ok = false;
    detail += (detail.empty() ? "" : "; ") + std::string("over time limit");
  }
  g_results.push_back({id, name, ok, seconds, time_limit, detail});
  std::printf("%s  %2d. %-38s %7.2fs  %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), seconds,
              detail.c_str());
  std::fflush(stdout);
}

Matrix lifted_rows(std::size_t rows, std::size_t m, Rng& rng) {
  const auto basis = LcwBasis::shared(m);
  Matrix W(rows, m);
  std::vector<double> v(m - 1);
  for (std::size_t i = 0; i < rows; ++i) {
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    const auto w = basis->lift(v);
    for (std::size_t j = 0; j < m; ++j) W(i, j) = w[j];
  }
  return W;
}

Network sigmoid_mlp(std::size_t depth, std::size_t width, std::size_t input_dim,
                    std::size_t classes, bool lcw) {
  ModelSpec spec;
  spec.hidden.assign(depth, width);
  spec.activation = Activation::sigmoid;
  spec.lcw.assign(depth + 1, lcw);
  spec.batchnorm.assign(depth, false);
  return build_mlp(spec, input_dim, classes);
}

TrainConfig contrast_config(bool lcw, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.seed = seed;
  cfg.dataset.kind = DatasetKind::synthetic;
  cfg.dataset.synthetic = {10, 128, 500, 10.0};  // 5000 training samples
  cfg.dataset.synthetic_test_per_class = 100;
  cfg.model.hidden.assign(15, 64);
  cfg.model.activation = Activation::sigmoid;
  cfg.model.lcw.assign(16, lcw);
  cfg.model.batchnorm.assign(15, false);
  cfg.init = lcw ? InitScheme::minibatch_rescale : InitScheme::glorot_uniform;
  cfg.epochs = 30;
  cfg.batch_size = 128;
  cfg.learning_rate = 0.1;
  cfg.lr_decay = 0.95;
  cfg.lr_floor = 0.001;
  cfg.momentum = 0.9;
  cfg.weight_decay = 0.0001;
  return cfg;
}

std::string g_lcw_csv, g_plain_csv;  // criterion 11 artifacts reused by criterion 12

char buffer_for_detail[256];

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  std::snprintf(buffer_for_detail, sizeof(buffer_for_detail), pattern, a, b, c);
  return buffer_for_detail;
}

}  // namespace

int main() {
  // 1. Basis correctness across dimensions.
  run(1, "basis orthonormality and zero sums", 5.0, [](std::string& detail) {
    double worst_orth = 0.0, worst_ones = 0.0;
    for (std::size_t m : {2, 3, 4, 8, 16, 64, 256, 512}) {
      const LcwBasis basis = LcwBasis::build(m);
      const Matrix& B = basis.matrix();
      const double orth =
          sub(matmul(B.transposed(), B), Matrix::identity(m - 1)).frobenius_norm();
      double ones2 = 0.0;
      for (std::size_t j = 0; j + 1 < m; ++j) {
        double c = 0.0;
        for (std::size_t i = 0; i < m; ++i) c += B(i, j);
        ones2 += c * c;
      }
      worst_orth = std::max(worst_orth, orth);
      worst_ones = std::max(worst_ones, std::sqrt(ones2));
    }
    detail = fmt("max residuals: orth %.2e, ones %.2e", worst_orth, worst_ones);
    return worst_orth < 1e-10 && worst_ones < 1e-10;
  });

  // 2. Activation-shift prediction in the random-matrix regime.
  run(2, "shift predictions (100x100 regime)", 1.0, [](std::string& detail) {
    Rng rng(2024);
    const Matrix W = rand_uniform(rng, -1.0, 1.0, 100, 100);
    const Matrix A = rand_uniform(rng, 0.0, 1.0, 100, 100);
    const std::vector<double> mu(100, 0.5);
    const ShiftReport rep = measure_shift(W, A, mu);
    detail = fmt("%g/100 rows within 4 SE", static_cast<double>(rep.rows_within_4se));
    return rep.rows_within_4se >= 99;
  });

  // 3. Null shift for zero-sum rows in the same regime.
  run(3, "zero-sum rows have null shift", 1.0, [](std::string& detail) {
    Rng rng(2025);
    const Matrix W = lifted_rows(100, 100, rng);
    const Matrix A = rand_uniform(rng, 0.0, 1.0, 100, 100);
    const std::vector<double> mu(100, 0.5);
    const ShiftReport rep = measure_shift(W, A, mu);
    std::size_t within = 0;
    for (const auto& row : rep.rows)
      if (std::fabs(row.empirical_mean) <= 4.0 * row.standard_error) ++within;
    detail = fmt("%g/100 rows with |mean| <= 4 SE", static_cast<double>(within));
    return within == 100;
  });

  // 4. Forward and backward variance laws at m = 64, N = 1e6.
  run(4, "variance laws and kappa^2 rescaling", 30.0, [](std::string& detail) {
    Rng rng(2026);
    const std::size_t n = 1000000;
    const Matrix W_lc = lifted_rows(4, 64, rng);
    const auto fwd = verify_forward_variance(W_lc, 0.5, 1.0, n, rng);
    double worst = 0.0;
    for (const auto& row : fwd.rows)
      worst = std::max(worst, std::fabs(row.empirical_var / row.predicted_var - 1.0));

    Matrix scaled = W_lc;
    scaled.scale(3.0);
    const auto big = verify_forward_variance(scaled, 0.5, 1.0, n, rng);
    double worst_kappa = 0.0;
    for (std::size_t i = 0; i < fwd.rows.size(); ++i) {
      const double ratio = big.rows[i].empirical_var / fwd.rows[i].empirical_var;
      worst_kappa = std::max(worst_kappa, std::fabs(ratio / 9.0 - 1.0));
    }

    const Matrix W = rand_uniform(rng, -1.0, 1.0, 64, 64);
    const auto bwd = verify_backward_variance(W, 1.0, n, rng);
    double worst_bwd = 0.0;
    for (const auto& row : bwd.rows)
      worst_bwd = std::max(worst_bwd, std::fabs(row.empirical_var / row.predicted_var - 1.0));

    detail = fmt("max ratio deviations: fwd %.4f, bwd %.4f, kappa %.4f", worst, worst_bwd,
                 worst_kappa);
    return worst < 0.02 && worst_bwd < 0.02 && worst_kappa < 0.02;
  });

  // 5. Row/column amplification identity.
  run(5, "eta equals xi for square matrices", 0.0, [](std::string& detail) {
    Rng rng(2027);
    double worst = 0.0;
    for (std::size_t m : {8, 64, 256, 512}) {
      const Matrix W = rand_uniform(rng, -1.0, 1.0, m, m);
      const auto [eta, xi] = row_col_amplification(W);
      worst = std::max(worst, std::fabs(eta - xi) / eta);
    }
    detail = fmt("max relative difference %.2e", worst);
    return worst < 1e-12;
  });

  // 6. ReLU variance amplification.
  run(6, "relu variance ratios", 30.0, [](std::string& detail) {
    Rng rng(2028);
    const auto est = measure_phi(PhiActivation::relu, 1.0, 1000000, rng);
    const double expected = 0.5 * (1.0 - 1.0 / std::numbers::pi);
    detail = fmt("phi_fw %.4f (expect %.4f), phi_bw %.4f", est.phi_fw, expected, est.phi_bw);
    return std::fabs(est.phi_fw - expected) < 0.005 && std::fabs(est.phi_bw - 0.5) < 0.005;
  });

  // 7. Sigmoid amplification table (std ratios, as the source table reports).
  run(7, "sigmoid amplification table", 30.0, [](std::string& detail) {
    Rng rng(2029);
    const double table[3][3] = {{0.5, 0.236, 0.237}, {1.0, 0.208, 0.211}, {2.0, 0.157, 0.170}};
    bool ok = true;
    std::string parts;
    for (const auto& entry : table) {
      const auto est = measure_phi(PhiActivation::sigmoid, entry[0], 1000000, rng);
      ok = ok && std::fabs(est.std_ratio_fw() - entry[1]) < 0.01 &&
           std::fabs(est.std_ratio_bw() - entry[2]) < 0.01;
      parts += fmt("(%.3f, %.3f) ", est.std_ratio_fw(), est.std_ratio_bw());
    }
    detail = parts + "vs (0.236, 0.237) (0.208, 0.211) (0.157, 0.170)";
    return ok;
  });

  // 8. Finite-difference master check over ten seeds.
  run(8, "gradient checks over 10 seeds", 30.0, [](std::string& detail) {
    double worst = 0.0;
    bool ok = true;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      for (const auto& result : run_gradcheck_suite(seed)) {
        worst = std::max(worst, result.max_rel_error);
        ok = ok && result.pass && result.max_rel_error < 1e-5;
      }
    }
    detail = fmt("worst relative error %.2e", worst);
    return ok;
  });

  // 9. Vanishing-gradient reproduction on 20-layer sigmoid MLPs.
  run(9, "gradient variance profiles (20 layers)", 10.0, [](std::string& detail) {
    Rng rng(2030);
    const Matrix probe = rand_uniform(rng, 0.0, 1.0, 64, 100);

    double ratios[2] = {0.0, 0.0};
    double z_min = 1.0, z_max = 1.0;
    for (int mode = 0; mode < 2; ++mode) {
      Network net = sigmoid_mlp(20, 64, 64, 10, mode == 1);
      Rng init_rng(2031);
      minibatch_rescale_init(net, probe, init_rng);
      Rng label_rng(2032);
      const auto rows = layer_profile(net, probe, nullptr, label_rng);
      double v1 = 0.0, v19 = 0.0;
      for (const auto& row : rows) {
        if (row.layer == 1) v1 = row.preact_grad.variance;
        if (row.layer == 19) v19 = row.preact_grad.variance;
        z_min = std::min(z_min, row.preact.variance);
        z_max = std::max(z_max, row.preact.variance);
      }
      ratios[mode] = v1 / v19;
    }
    detail = fmt("standard ratio %.2e, lcw ratio %.2f, V(z) span [%.3f..]", ratios[0],
                 ratios[1], z_min);
    return ratios[0] < 1e-4 && ratios[1] >= 0.1 && ratios[1] <= 10.0 && z_min >= 0.5 &&
           z_max <= 2.0;
  });

  // 10. Zero-sum constraint survives training.
  run(10, "constraint preservation over 200 steps", 0.0, [](std::string& detail) {
    Rng rng(2033);
    Network net = sigmoid_mlp(4, 32, 16, 4, true);
    const Matrix batch = rand_uniform(rng, 0.0, 1.0, 16, 64);
    minibatch_rescale_init(net, batch, rng);
    std::vector<int> labels(64);
    for (auto& y : labels) y = static_cast<int>(rng.below(4));

    SgdState sgd;
    TrainConfig cfg;
    for (std::size_t step = 0; step < 200; ++step) {
      net.zero_grad();
      net.loss(batch, labels);
      net.backward();
      sgd.step(net.params(), lr_schedule(step / 40, cfg), 0.9, 1e-4);
      net.sync_parameters();
    }

    double worst = 0.0;
    for (std::size_t i = 0; i < net.size(); ++i)
      if (auto* dense = dynamic_cast<DenseLayer*>(&net.layer(i)))
        for (std::size_t r = 0; r < dense->out_features(); ++r) {
          double s = 0.0;
          for (std::size_t c = 0; c < dense->in_features(); ++c) s += dense->weights()(r, c);
          worst = std::max(worst, std::fabs(s));
        }
    detail = fmt("max |sum of row| %.2e", worst);
    return worst < 1e-9;
  });

  // 11. Trainability contrast on 15-layer sigmoid MLPs.
  run(11, "trainability contrast (15 layers)", 300.0, [](std::string& detail) {
    const TrainOutput lcw_run = train(contrast_config(true, 77));
    const TrainOutput plain_run = train(contrast_config(false, 77));
    g_lcw_csv = lcw_run.log.to_csv();
    g_plain_csv = plain_run.log.to_csv();

    const double lcw_acc = lcw_run.log.rows.back().train_accuracy;
    const double plain_acc = plain_run.log.rows.back().train_accuracy;
    detail = fmt("lcw train acc %.3f (needs > 0.80), plain %.3f (chance 0.10)", lcw_acc,
                 plain_acc);
    return lcw_acc > 0.80 && std::fabs(plain_acc - 0.10) <= 0.05;
  });

  // 12. Bit-identical metrics under a repeated run.
  run(12, "determinism of the metrics artifact", 0.0, [](std::string& detail) {
    const TrainOutput lcw_again = train(contrast_config(true, 77));
    const TrainOutput plain_again = train(contrast_config(false, 77));
    const bool ok =
        lcw_again.log.to_csv() == g_lcw_csv && plain_again.log.to_csv() == g_plain_csv;
    detail = ok ? "CSVs byte-identical across reruns" : "CSV mismatch between reruns";
    return ok;
  });

  int failures = 0;
  for (const auto& c : g_results)
    if (!c.pass) ++failures;
  std::printf("%zu/%zu criteria passed\n", g_results.size() - failures, g_results.size());
  return failures == 0 ? 0 : 1;
}
