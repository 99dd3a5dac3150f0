// Scenario catalogue and artifact emission.
//
// Every scenario is a pure function of its config: the plant, filter noise
// and network initialisation are seeded, and the outputs are byte-stable.
#pragma once

#include "nnid/config.hpp"
#include "nnid/report.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nnid {

struct Failure {
  std::string what;
  std::size_t step = 0;
};

/// Eigenvalue band of the configured plant's inertia matrix.
InertiaBand plant_band(const ExperimentConfig& cfg);

/// Fresh network for the configured plant, centred on the reference start.
NetworkBundle initial_network(const ExperimentConfig& cfg);

/// ν0 calibration: log a frozen run with the initial networks, batch
/// pre-fit on it, replay frozen at the pre-fit and take the configured
/// percentile of ‖ε‖. Logging always uses PD feedback (an untrained NNIDC
/// would not produce a usable trajectory). Throws DivergenceError.
struct Nu0Calibration {
  double nu0 = 0.0;
  NetworkBundle prefit;
  LmReport lm;
  std::size_t samples = 0;
};
Nu0Calibration calibrate_noise_bound(const ExperimentConfig& cfg);

/// Mean ‖M̂ − M‖_F, ‖Ĉ − C‖_F, ‖Ĝ − G‖ over a validation grid spanning the
/// box of joint positions and velocities visited by a run.
struct RecoveryReport {
  std::size_t points = 0;
  double M_initial = 0.0, M_final = 0.0;
  double C_initial = 0.0, C_final = 0.0;
  double G_initial = 0.0, G_final = 0.0;
};
RecoveryReport term_recovery(const PlantModel& plant,
                             const NetworkBundle& before,
                             const NetworkBundle& after, const RunLog& run,
                             std::size_t points_per_joint);

/// Identification run. The loop is executed twice with identical inputs:
/// the second pass uses the first pass's final weights as the Lyapunov
/// reference θ*, so V and dV in `log` are the post-hoc values.
struct IdentifyResult {
  double nu0 = 0.0;
  NetworkBundle initial;
  RunLog log;
  std::optional<Failure> failure;
  RecoveryReport recovery;
};
IdentifyResult identify(const ExperimentConfig& cfg);

/// CSV round trip of a log followed by summarize().
SummaryReport summarize_log(const RunLog& log);

struct SweepRow {
  double alpha = 0.0;
  double threshold = 0.0;  // 2γν0/α
  double time_to_threshold = 0.0;
  double weight_tv = 0.0;
  RunLog log;
  std::optional<Failure> failure;
};
struct SweepResult {
  double nu0 = 0.0;
  bool gamma_rule_waived = false;  // some α < γ
  std::vector<SweepRow> rows;
  bool time_non_increasing = false;
  bool tv_non_decreasing = false;
};
/// One run per α with everything else (ν0 included) held fixed.
SweepResult alpha_sweep(const ExperimentConfig& cfg);

struct AblationResult {
  double nu0 = 0.0;
  RunLog dead_zone;
  RunLog no_dead_zone;
  std::optional<Failure> failure;
};
AblationResult dead_zone_ablation(const ExperimentConfig& cfg);

/// PD-only against NNIDC, both starting from the batch pre-fit. NNIDC keeps
/// adapting online with rates scaled by compare.rate_scale.
struct CompareResult {
  double nu0 = 0.0;
  RunLog pd;
  RunLog nnidc;
  std::vector<bool> gravity_loaded;  // per joint
  std::optional<Failure> failure;
};
CompareResult compare_controllers(const ExperimentConfig& cfg);

struct FirstOrderStep {
  double t, y, u, ydot, a_hat, b_hat, eps, emod;
  bool in_dead_zone;
};
struct FirstOrderResult {
  double pole = 0.0;           // true a
  double pole_estimate = 0.0;  // â at the end of the run
  double gain_estimate = 0.0;
  std::vector<FirstOrderStep> steps;
};
FirstOrderResult first_order_demo(const FirstOrderSettings& s, double dt);

/// Resolves the output directory, honouring NNID_OUTPUT_ROOT for relative
/// paths.
std::string output_directory(const ExperimentConfig& cfg);

/// Runs the configured scenario and writes its artifacts. Returns 0, or 3
/// when a run diverged (partial CSV and a FAILED marker are written).
int run_scenario(const ExperimentConfig& cfg);

}  // namespace nnid
