#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "lcwnet/checkpoint.hpp"
#include "lcwnet/diagnostics.hpp"
#include "lcwnet/gradcheck.hpp"
#include "lcwnet/trainer.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitVerification = 2;
constexpr int kExitRuntime = 3;

int cmd_train(const std::string& config_path, const std::string& out_override) {
  lcw::TrainConfig cfg = lcw::load_config_file(config_path);
  if (!out_override.empty()) cfg.out_dir = out_override;
  std::filesystem::create_directories(cfg.out_dir);

  lcw::TrainOutput out = lcw::train(cfg, &std::cout);
  lcw::write_text_file(cfg.out_dir + "/metrics.csv", out.log.to_csv());
  lcw::save_checkpoint(out.net, cfg.out_dir + "/checkpoint.bin");
  std::cout << "wrote " << cfg.out_dir << "/metrics.csv and " << cfg.out_dir
            << "/checkpoint.bin\n";
  return kExitOk;
}

int cmd_verify_props(std::uint64_t seed, std::size_t samples, const std::string& out_path) {
  const auto verdicts = lcw::run_verification_battery(seed, samples);
  bool all_pass = true;
  std::cout << "name                                      expected     observed     pass\n";
  for (const auto& v : verdicts) {
    std::ostringstream line;
    line.precision(6);
    line << v.name;
    for (std::size_t i = v.name.size(); i < 42; ++i) line << ' ';
    line << v.expected << "\t" << v.observed << "\t" << (v.pass ? "PASS" : "FAIL");
    std::cout << line.str() << "\n";
    all_pass = all_pass && v.pass;
  }
  if (!out_path.empty()) {
    lcw::write_text_file(out_path, lcw::verdicts_to_json(verdicts));
    std::cout << "wrote " << out_path << "\n";
  }
  std::cout << (all_pass ? "all verifications passed" : "some verifications FAILED") << "\n";
  return all_pass ? kExitOk : kExitVerification;
}

int cmd_profile(const std::string& config_path, const std::string& out_override,
                std::size_t probe_samples, std::vector<std::size_t> quantile_layers,
                std::size_t neurons) {
  lcw::TrainConfig cfg = lcw::load_config_file(config_path);
  if (!out_override.empty()) cfg.out_dir = out_override;
  std::filesystem::create_directories(cfg.out_dir);

  // Build, initialize, and probe without training.
  lcw::Rng rng(cfg.seed);
  lcw::Dataset data;
  switch (cfg.dataset.kind) {
    case lcw::DatasetKind::synthetic:
      data = lcw::make_synthetic(cfg.dataset.synthetic, rng);
      break;
    case lcw::DatasetKind::cifar10:
      data = lcw::load_cifar10(cfg.dataset.dir).train;
      break;
    case lcw::DatasetKind::cifar100:
      data = lcw::load_cifar100(cfg.dataset.dir).train;
      break;
  }
  if (data.size() < probe_samples)
    throw std::runtime_error("profile: dataset has fewer than " +
                             std::to_string(probe_samples) + " samples");

  lcw::Matrix batch(data.inputs.rows(), probe_samples);
  std::vector<int> labels(probe_samples);
  for (std::size_t j = 0; j < probe_samples; ++j) {
    for (std::size_t f = 0; f < batch.rows(); ++f) batch(f, j) = data.inputs(f, j);
    labels[j] = data.labels[j];
  }

  lcw::Network net = lcw::build_mlp(cfg.model, data.inputs.rows(), data.classes);
  if (cfg.init == lcw::InitScheme::minibatch_rescale)
    lcw::minibatch_rescale_init(net, batch, rng);
  else
    lcw::glorot_init(net, rng);

  const auto profile = lcw::layer_profile(net, batch, &labels, rng);
  lcw::write_text_file(cfg.out_dir + "/layer_profile.csv", lcw::layer_profile_csv(profile));

  // Drop requested layers that exceed the network depth.
  std::vector<std::size_t> layers;
  for (std::size_t idx : quantile_layers)
    if (idx >= 1 && idx <= cfg.model.hidden.size()) layers.push_back(idx);
  if (layers.empty()) layers = {1};
  const auto quantiles = lcw::activation_quantiles(net, batch, layers, neurons);
  lcw::write_text_file(cfg.out_dir + "/activation_quantiles.csv",
                       lcw::quantiles_csv(quantiles));

  std::cout << "wrote " << cfg.out_dir << "/layer_profile.csv and " << cfg.out_dir
            << "/activation_quantiles.csv\n";
  return kExitOk;
}

int cmd_shift_demo(std::uint64_t seed, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  lcw::Rng rng(seed);
  const lcw::Matrix W = lcw::rand_uniform(rng, -1.0, 1.0, 100, 100);
  const lcw::Matrix A = lcw::rand_uniform(rng, 0.0, 1.0, 100, 100);
  const std::vector<double> mu(100, 0.5);

  const lcw::Matrix Z = lcw::matmul(W, A);
  std::ostringstream grid;
  grid.precision(17);
  grid << "row,col,z\n";
  for (std::size_t i = 0; i < Z.rows(); ++i)
    for (std::size_t j = 0; j < Z.cols(); ++j) grid << i << "," << j << "," << Z(i, j) << "\n";
  lcw::write_text_file(out_dir + "/shift_grid.csv", grid.str());

  const lcw::ShiftReport report = lcw::measure_shift(W, A, mu);
  lcw::write_text_file(out_dir + "/shift_rows.csv", lcw::shift_report_csv(report));

  std::cout << "wrote " << out_dir << "/shift_grid.csv and " << out_dir << "/shift_rows.csv\n"
            << "rows within 4 standard errors: " << report.rows_within_4se << "/100\n";
  return kExitOk;
}

int cmd_gradcheck(std::uint64_t seed) {
  const auto results = lcw::run_gradcheck_suite(seed);
  bool all_pass = true;
  for (const auto& r : results) {
    std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.name << "  max_rel_error "
              << r.max_rel_error << " (threshold " << r.threshold << ")\n";
    all_pass = all_pass && r.pass;
  }
  return all_pass ? kExitOk : kExitVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linearly constrained weights: training, diagnostics, and verification"};
  app.require_subcommand(1);

  std::string config_path, out_override;
  auto* train = app.add_subcommand("train", "Train a model from a JSON config");
  train->add_option("config", config_path, "Path to the JSON config")->required();
  train->add_option("--out", out_override, "Output directory (overrides config)");

  std::uint64_t seed = 1;
  std::size_t samples = 1000000;
  std::string verdict_path;
  auto* verify = app.add_subcommand("verify-props", "Run the statistical verification battery");
  verify->add_option("--seed", seed, "RNG seed");
  verify->add_option("--samples", samples, "Monte Carlo sample count");
  verify->add_option("--out", verdict_path, "Write the JSON verdicts here");

  std::string profile_config, profile_out;
  std::size_t probe_samples = 100;
  std::vector<std::size_t> quantile_layers = {1, 5, 9};
  std::size_t neurons = 20;
  auto* profile = app.add_subcommand("profile", "Layer profiles and activation quantiles");
  profile->add_option("config", profile_config, "Path to the JSON config")->required();
  profile->add_option("--out", profile_out, "Output directory (overrides config)");
  profile->add_option("--probe-samples", probe_samples, "Probe batch size");
  profile->add_option("--layers", quantile_layers, "Activation layers for quantiles (1-based)");
  profile->add_option("--neurons", neurons, "Neurons per selected layer");

  std::uint64_t demo_seed = 1;
  std::string demo_out = "shift-demo";
  auto* demo = app.add_subcommand("shift-demo", "Reproduce the random-weight stripe pattern");
  demo->add_option("--seed", demo_seed, "RNG seed");
  demo->add_option("--out", demo_out, "Output directory");

  std::uint64_t gradcheck_seed = 1;
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference checks for every layer type");
  gc->add_option("--seed", gradcheck_seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (app.got_subcommand(train)) return cmd_train(config_path, out_override);
    if (app.got_subcommand(verify)) return cmd_verify_props(seed, samples, verdict_path);
    if (app.got_subcommand(profile))
      return cmd_profile(profile_config, profile_out, probe_samples, quantile_layers, neurons);
    if (app.got_subcommand(demo)) return cmd_shift_demo(demo_seed, demo_out);
    if (app.got_subcommand(gc)) return cmd_gradcheck(gradcheck_seed);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
