// Error families driving identification, their weighted stack (the WAE) and
// the first-order modified-error filter.
//
//   e1  torque residual τ − M̂q̈ − Ĉq̇ − Ĝ                     (N)
//   e2  diagonal skew residual (dM̂/dt)_nn − 2Ĉ_nn               (N)
//   e3  off-diagonal skew residual per pair i < n               ((N²−N)/2)
//   e4  inertia eigenvalue residual |det(M̂ − λ_n I)|           (N)
//   ε = [e1; λ1·e2; λ2·e3; λ3·e4]
#pragma once

#include "nnid/network.hpp"
#include "nnid/plant.hpp"

namespace nnid {

struct LagrangianWeights {
  double lambda1 = 2.0;
  double lambda2 = 2.0;
  double lambda3 = 2.0;
};

struct ErrorStack {
  Vec e1;
  Vec e2;
  Vec e3;
  Vec e4;
  Vec eps;
  Vec e_mod;
  double band_penalty = 0.0;
};

/// Length of the stacked WAE for an N-joint arm: 3N + (N²−N)/2.
constexpr Eigen::Index wae_length(Eigen::Index n) {
  return 3 * n + (n * n - n) / 2;
}

/// Number of unordered off-diagonal pairs, (N²−N)/2.
constexpr Eigen::Index pair_count(Eigen::Index n) { return (n * n - n) / 2; }

Vec torque_error(const MotionSample& sample, const TermsEstimate& est);

Vec skew_diag_error(const Mat& mhat_rate, const Mat& C_hat);

/// Pairs (i, n) with i < n enumerated lexicographically.
Vec skew_offdiag_error(const Mat& mhat_rate, const Mat& C_hat);

struct InertiaBoundError {
  Vec e4;
  /// Σ squared eigenvalue excursions outside [lower, upper]; diagnostic only.
  double band_penalty = 0.0;
};

/// e4_n = |det(M̂ − λ_n I)|, λ_n = eig_n(sym M̂) · exp(λ0 / t), ascending.
/// Requires t > 0.
InertiaBoundError inertia_bound_error(const Mat& M_hat, double t,
                                      double lambda0, const InertiaBand& band);

/// Same residual for a precomputed eigenvalue scale s = exp(λ0 / t).
Vec inertia_residual(const Mat& M_hat, double scale);

Vec stack_wae(const Vec& e1, const Vec& e2, const Vec& e3, const Vec& e4,
              const LagrangianWeights& lw);

/// Forward-Euler step of α·e + ė = ε. Throws ConfigError unless
/// α > 0 and α·dt < 2.
Vec modified_error_step(const Vec& e_mod, const Vec& eps, double alpha,
                        double dt);

}  // namespace nnid
