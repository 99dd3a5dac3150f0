// Control laws and the closed-loop identification pipeline.
//
// Per step: measure q (+ noise) → Kalman regressors → ε and Jacobians →
// modified error and dead-zone gate → weight update → Lyapunov monitor →
// control torque → RK4 integration.
#pragma once

#include "nnid/kalman.hpp"
#include "nnid/learner.hpp"
#include "nnid/plant.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nnid {

enum class ControllerKind { Proportional, Pd, Nnidc };

std::string to_string(ControllerKind k);
ControllerKind controller_kind_from_string(const std::string& name);

struct PdGains {
  Vec kp;  // N·m/rad (PD) or 1/s² (NNIDC outer loop)
  Vec kd;  // N·m·s/rad (PD) or 1/s
};

/// Throws std::invalid_argument unless every gain is finite and positive.
void validate(const PdGains& gains, Eigen::Index dof);

/// τ = Kp (q_ref − q)
Vec proportional_controller(const Vec& q, const Vec& q_ref, const Vec& kp);

/// τ = Kp e + Kd ė, e = q_ref − q
Vec pd_controller(const Vec& q, const Vec& qdot, const Vec& q_ref,
                  const Vec& qdot_ref, const PdGains& gains);

struct NnidcOutput {
  Vec tau;
  bool fallback = false;  // M̂ too ill-conditioned, PD used instead
};

inline constexpr double kNnidcConditionLimit = 1e6;

/// τ = M̂(q̈_d + Kd ė + Kp e) + Ĉ q̇ + Ĝ, falling back to PD when
/// cond(M̂) > 1e6.
NnidcOutput nnidc_controller(const Vec& q, const Vec& qdot,
                             const Reference& ref, const PdGains& gains,
                             const TermsEstimate& est);

// =============================================================================
// Identification loop
// =============================================================================

struct LoopConfig {
  double duration = 60.0;  // s
  ExcitationSpec reference;
  ControllerKind controller = ControllerKind::Proportional;
  PdGains gains;
  KalmanTuning kalman;
  double noise_std = 0.0;  // rad, additive Gaussian on measured q
  std::uint64_t seed = 1;
  bool learn = true;
  InertiaBand band;
  /// Lyapunov reference weights; defaults to the initial weights.
  std::optional<Vec> theta_ref;
  /// Initial plant state; defaults to the reference at t = 0 at rest.
  std::optional<Vec> q0;
};

/// Weight-norm columns: M.hidden, M.output, C.hidden, C.output, G.hidden,
/// G.output.
using BlockNorms = std::array<double, 6>;
BlockNorms block_norms(const NetworkBundle& nets);

struct StepRecord {
  double t = 0.0;
  Vec q, qdot, qddot;  // plant truth
  Vec tau;             // torque applied over the preceding interval
  Vec q_meas;
  Vec q_f, qdot_f, qddot_f;  // Kalman regressors
  Vec q_ref;
  Vec tau_hat;
  Vec e1, e2, e3, e4;
  double eps_norm = 0.0;
  double emod_norm = 0.0;
  bool in_dead_zone = false;  // ‖e_mod‖ < γν0/α
  bool gate = false;          // adaptation ran this step
  bool weights_changed = false;
  double V = 0.0;
  double dV = 0.0;
  Region region = Region::IV;
  BlockNorms weight_norms{};
  double weight_step = 0.0;  // ‖θ_k − θ_{k−1}‖
  bool fallback = false;
  double err_M = 0.0;  // ‖M̂ − M‖_F at the true state
  double err_C = 0.0;
  double err_G = 0.0;
};

struct RunLog {
  std::size_t dof = 0;
  std::vector<StepRecord> steps;
  NetworkBundle final_nets;
};

/// Runs the closed loop. Throws DivergenceError (with step index) if the
/// plant or the weights stop being finite.
RunLog run_identification_loop(const PlantModel& plant,
                               const NetworkBundle& nets,
                               const HyperParams& hp, const LoopConfig& cfg);

/// Same, filling `log` in place so that the steps completed before a
/// DivergenceError remain available to the caller.
void run_identification_loop(const PlantModel& plant,
                             const NetworkBundle& nets,
                             const HyperParams& hp, const LoopConfig& cfg,
                             RunLog& log);

/// Regressor samples (filtered q, q̇, q̈ and applied τ) from a run.
std::vector<MotionSample> regressor_samples(const RunLog& log);

}  // namespace nnid
