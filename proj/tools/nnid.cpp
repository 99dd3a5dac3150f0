// nnid: command-line front end for the identification scenarios.
//
//   nnid run <config> [--set key=value]...
//   nnid sweep <config> --param alpha --values 1,5,20
//   nnid compare <config>
//   nnid calibrate-nu0 <config>
//
// Exit codes: 0 success, 2 configuration error, 3 divergence, 1 anything else.
#include "nnid/experiments.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

constexpr int kConfigError = 2;
constexpr int kDiverged = 3;

void apply_sets(nnid::ExperimentConfig& cfg, const std::vector<std::string>& sets) {
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw nnid::ConfigError("--set expects key=value, got '" + s + "'");
    }
    nnid::apply_override(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
}

int calibrate(const nnid::ExperimentConfig& cfg) {
  nnid::check_config(cfg);
  const auto cal = nnid::calibrate_noise_bound(cfg);
  const std::filesystem::path dir = nnid::output_directory(cfg);
  std::filesystem::create_directories(dir);
  const std::string text = fmt::format(
      "nu0 = {:.17g}\npercentile = {:.17g}\nsamples = {}\nprefit_iterations = "
      "{}\nprefit_initial_cost = {:.17g}\nprefit_final_cost = {:.17g}\n",
      cal.nu0, cfg.nu0_percentile, cal.samples, cal.lm.iterations,
      cal.lm.initial_cost, cal.lm.final_cost);
  std::ofstream(dir / "nu0.txt") << text;
  nnid::save_weights((dir / "weights_prefit.txt").string(), cal.prefit);
  std::cout << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online neural identification of manipulator dynamics"};
  app.require_subcommand(1);

  std::string path;
  std::vector<std::string> sets;
  std::string out_dir;
  const auto common = [&](CLI::App* sub) {
    sub->add_option("config", path, "Experiment config file")->required();
    sub->add_option("--set", sets, "Override a config value (key=value)");
    sub->add_option("-o,--out", out_dir, "Output directory");
  };

  auto* run = app.add_subcommand("run", "Run the scenario named in the config");
  common(run);

  std::string param = "alpha";
  std::vector<double> values;
  auto* sweep = app.add_subcommand("sweep", "Sweep one learner parameter");
  common(sweep);
  sweep->add_option("--param", param, "Swept parameter (alpha)");
  sweep->add_option("--values", values, "Values to sweep")->delimiter(',');

  auto* compare = app.add_subcommand("compare", "PD against NNIDC");
  common(compare);

  auto* calib = app.add_subcommand("calibrate-nu0", "Estimate the noise bound ν0");
  common(calib);

  CLI11_PARSE(app, argc, argv);

  try {
    nnid::ExperimentConfig cfg = nnid::load_config(path);
    apply_sets(cfg, sets);
    if (!out_dir.empty()) cfg.output_dir = out_dir;

    if (calib->parsed()) return calibrate(cfg);
    if (compare->parsed()) cfg.scenario = nnid::Scenario::Compare;
    if (sweep->parsed()) {
      if (param != "alpha") {
        throw nnid::ConfigError("sweep: only --param alpha is supported");
      }
      cfg.scenario = nnid::Scenario::AlphaSweep;
      if (!values.empty()) cfg.sweep_alphas = values;
    }
    const int code = nnid::run_scenario(cfg);
    if (code == kDiverged) {
      std::cerr << "nnid: run diverged; see FAILED in "
                << nnid::output_directory(cfg) << '\n';
    }
    return code;
  } catch (const nnid::ConfigError& e) {
    std::cerr << "nnid: config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const nnid::DivergenceError& e) {
    std::cerr << "nnid: diverged at step " << e.step() << ": " << e.what() << '\n';
    return kDiverged;
  } catch (const std::exception& e) {
    std::cerr << "nnid: " << e.what() << '\n';
    return 1;
  }
}
