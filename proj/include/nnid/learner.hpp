// Adaptive update laws with dead-zone robust modification and a Lyapunov
// monitor for the identification loop.
//
// Each subnet i ∈ {M, C, G} follows the explicit-Euler discretisation of
//   Ẇ_i^h = −γ_i1 · (∂ε/∂W_i^h)ᵀ ε,   Ẇ_i^o = −γ_i2 · (∂ε/∂W_i^o)ᵀ ε
// and is frozen whenever the modified error lies inside the ball of radius
// γ·ν0/α. When only the torque block of ε is non-zero the Jacobians reduce to
// −ξ_i and −ζ_i from regressor_jacobians().
#pragma once

#include "nnid/errors.hpp"

#include <optional>
#include <string>

namespace nnid {

enum class RobustMode { DeadZone, Sigma };

std::string to_string(RobustMode m);
RobustMode robust_mode_from_string(const std::string& name);

/// Per-block learning rates; *_hidden is γ_i1, *_output is γ_i2.
struct LearningRates {
  double m_hidden = 2.0;
  double m_output = 0.5;
  double c_hidden = 6.0;
  double c_output = 1.5;
  double g_hidden = 60.0;
  double g_output = 15.0;

  double hidden(Term t) const;
  double output(Term t) const;
  LearningRates scaled(double k) const;
};

struct HyperParams {
  double alpha = 10.0;   // 1/s
  double gamma = 2.0;
  double nu0 = 0.0;      // bound on the inevitable error
  LearningRates rates;
  LagrangianWeights lw;
  double lambda0 = -0.1;  // s
  double dt = 1e-3;       // s
  double Gamma = 1.0;     // Lyapunov weight on ‖θ − θ*‖²
  RobustMode robust = RobustMode::DeadZone;
  double sigma = 0.0;          // leakage rate for RobustMode::Sigma
  double region_buffer = 3.0;  // width of region III in dead-zone radii
};

struct ValidationPolicy {
  /// Tuning rule 1 < γ ≤ α; sweeps over α may waive the upper bound.
  bool enforce_gamma_le_alpha = true;
};

/// Returns the first violated rule, or nullopt when hp is admissible.
std::optional<std::string> validate_hyperparams(const HyperParams& hp,
                                                ValidationPolicy policy = {});

double dead_zone_radius(const HyperParams& hp);

/// True when adaptation runs: ‖e_mod‖ ≥ γ·ν0/α (boundary included).
bool dead_zone_gate(const Vec& e_mod, const HyperParams& hp);

// =============================================================================
// Residual and its Jacobian
// =============================================================================

struct ResidualSettings {
  LagrangianWeights lw;
  double lambda0 = -0.1;
  InertiaBand band;
};

/// ∂ε/∂vec(W_i^h) and ∂ε/∂vec(W_i^o), each len(ε) × block size.
struct ResidualJacobian {
  std::array<Mat, 3> hidden;
  std::array<Mat, 3> output;
};

struct Residual {
  ErrorStack errors;  // e_mod left empty
  TermsEstimate estimate;
  ResidualJacobian jacobian;  // empty unless requested
};

/// Evaluates ε at one sample. e1–e3 derivatives are analytic; the e4 block
/// is differentiated by central differences over the entries of M̂.
Residual evaluate_residual(const NetworkBundle& nets, const MotionSample& s,
                           const ResidualSettings& cfg, bool with_jacobian);

/// One discrete update. Returns nets unchanged when the gate is closed
/// (unless σ-modification leakage is configured). Throws
/// std::runtime_error if the update produces non-finite weights.
NetworkBundle update_step(const NetworkBundle& nets, const Vec& eps,
                          const ResidualJacobian& jac, const HyperParams& hp,
                          bool gate);

// =============================================================================
// Lyapunov monitor
// =============================================================================

/// Operating regions around the dead-zone ball (radius r = γν0/α):
///   I   heuristic over-parameterisation flag, see LyapunovMonitor
///   II  ‖e‖ < r, inside the stability margin (frozen)
///   III r ≤ ‖e‖ ≤ buffer·r, operation band
///   IV  ‖e‖ > buffer·r
enum class Region { I = 1, II = 2, III = 3, IV = 4 };

struct LyapunovReport {
  double V = 0.0;
  double dV_estimate = 0.0;
  bool in_dead_zone = false;
  Region region = Region::IV;
};

/// V = ½(‖e‖² + Γ⁻¹‖θ − θ_ref‖²).
double lyapunov_value(const Vec& e_mod, const Vec& theta, const Vec& theta_ref,
                      double Gamma);

/// Single-shot report (dV_estimate = 0, region I never raised).
LyapunovReport lyapunov_monitor(const Vec& e_mod, const NetworkBundle& nets,
                                const Vec& theta_ref, const HyperParams& hp);

/// Stateful monitor producing per-step finite-difference dV and the
/// region-I heuristic: flagged once ‖e‖ has stayed below ν0/α for
/// `window` consecutive steps while ‖θ‖ grew over that stretch.
class LyapunovMonitor {
 public:
  LyapunovMonitor(Vec theta_ref, HyperParams hp, std::size_t window = 500);

  LyapunovReport observe(const Vec& e_mod, const NetworkBundle& nets);

 private:
  Vec theta_ref_;
  HyperParams hp_;
  std::size_t window_;
  std::optional<double> previous_V_;
  std::size_t quiet_steps_ = 0;
  double quiet_start_norm_ = 0.0;
};

}  // namespace nnid
