// Experiment configuration: a sectioned key = value file.
//
//   [scenario]   kind
//   [plant]      kind, dof, gravity, friction, masses, lengths, com_offsets,
//                inertias
//   [reference]  preset, amplitude_scale, frequency_scale
//   [network]    hidden_m, hidden_c, hidden_g, activation, seed
//   [learner]    alpha, gamma, nu0, nu0_percentile, rate_{m,c,g}_{hidden,output},
//                lambda1..3, lambda0, dt, Gamma, robust, sigma, region_buffer
//   [kalman]     jerk_density, measurement_variance, initial_variance
//   [controller] kind, kp, kd
//   [run]        duration, seed, noise_std, learn, warm_start
//   [prefit]     duration, stride, iterations
//   [sweep]      alphas
//   [compare]    rate_scale
//   [first_order] pole, gain, duration, rate, nu0, alpha, gamma
//   [output]     dir, plots, grid_points
//
// Unknown sections or keys are rejected. Lists are comma separated; a single
// value is broadcast to every joint.
#pragma once

#include "nnid/control.hpp"
#include "nnid/prefit.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace nnid {

enum class Scenario {
  Identify,
  AlphaSweep,
  DeadZoneAblation,
  Compare,
  FirstOrderDemo
};

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& name);

struct PrefitSettings {
  double duration = 20.0;  // s of logged data
  std::size_t stride = 20;
  LmOptions lm;
};

/// ẏ = −a·y + b·u identified with the same filter and dead zone.
struct FirstOrderSettings {
  double pole = 2.0;  // a, 1/s
  double gain = 1.0;  // b
  double duration = 20.0;
  double rate = 20.0;
  double nu0 = 1e-3;
  double alpha = 10.0;
  double gamma = 2.0;
};

struct ExperimentConfig {
  Scenario scenario = Scenario::Identify;
  PlantModel plant = two_link_arm();
  ExcitationSpec reference = default_excitation(2);
  NetworkShape network;
  std::uint64_t network_seed = 7;
  HyperParams hp;
  bool nu0_auto = true;
  double nu0_percentile = 0.95;
  LoopConfig loop;
  std::string warm_start = "none";  // none | prefit | <weights file>
  PrefitSettings prefit;
  std::vector<double> sweep_alphas{1.0, 5.0, 20.0};
  double compare_rate_scale = 0.01;
  FirstOrderSettings first_order;
  std::string output_dir = "out";
  bool plots = true;
  std::size_t grid_points = 10;
};

/// Defaults used when a key is absent.
ExperimentConfig default_config();

/// Throws ConfigError with the offending key or rule.
ExperimentConfig parse_config(std::istream& is);
ExperimentConfig load_config(const std::string& path);

/// Applies `section.key = value` on top of an existing config (used by the
/// CLI for sweeps and overrides).
void apply_override(ExperimentConfig& cfg, const std::string& dotted_key,
                    const std::string& value);

/// Rejects configs that cannot run: hyperparameters, gains, sizes.
void check_config(const ExperimentConfig& cfg);

}  // namespace nnid
