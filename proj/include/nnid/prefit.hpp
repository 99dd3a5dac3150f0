// Offline batch fitting of the three subnetworks and the ν0 calibration
// helper.
#pragma once

#include "nnid/control.hpp"

#include <functional>
#include <vector>

namespace nnid {

struct LmOptions {
  std::size_t max_iterations = 80;
  double initial_damping = 1e-3;
  double tolerance = 1e-12;  // relative cost decrease that ends the fit
};

struct LmReport {
  double initial_cost = 0.0;
  double final_cost = 0.0;
  std::size_t iterations = 0;
};

/// Residual r(θ) and its Jacobian ∂r/∂θ.
using ResidualFn = std::function<void(const Vec& theta, Vec& r, Mat& J)>;

/// Damped Gauss–Newton on ½‖r(θ)‖².
Vec levenberg_marquardt(const Vec& theta0, const ResidualFn& fn,
                        const LmOptions& opts, LmReport* report = nullptr);

/// ∂ε/∂θ for one sample in parameter_vector() order.
Mat residual_jacobian_full(const ResidualJacobian& jac);

/// Fits all weights to minimise Σ ½‖ε‖² over logged regressor samples
/// (every `stride`-th sample is used).
NetworkBundle batch_prefit(const NetworkBundle& init,
                           const std::vector<MotionSample>& data,
                           const ResidualSettings& settings,
                           std::size_t stride, const LmOptions& opts,
                           LmReport* report = nullptr);

/// Supervised fit of M̂, Ĉ, Ĝ to the plant's true terms at the given
/// (q, q̇) points. Simulation-only; used as a test oracle and as an upper
/// bound on achievable warm starts.
NetworkBundle fit_to_ground_truth(const NetworkBundle& init,
                                  const PlantModel& plant,
                                  const std::vector<PlantState>& points,
                                  const LmOptions& opts,
                                  LmReport* report = nullptr);

/// Given percentile of ‖ε‖ over a frozen-weight run.
double calibrate_nu0(const RunLog& frozen_run, double percentile = 0.95);

/// Nearest-rank percentile of a sample (p in [0, 1]).
double percentile(std::vector<double> values, double p);

}  // namespace nnid
