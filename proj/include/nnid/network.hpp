// Three parallel single-hidden-layer networks estimating M̂(q), Ĉ(q, q̇) and
// Ĝ(q), plus the regressor Jacobians consumed by the adaptive update law.
//
// Weight layout (the contract shared with the learner):
//   hidden: P × (d_in + 1), last column is the hidden bias
//   output: d_out × (P + 1), last column is the output bias
// Flattened parameter vectors are row-major, so each row's bias comes last.
// M- and C-subnets emit N² entries which are reshaped row-major into N×N
// matrices.
#pragma once

#include "nnid/types.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>

namespace nnid {

enum class Activation { Tanh, Linear };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

double activate(Activation a, double x);
double activation_slope(Activation a, double x);
double activation_curvature(Activation a, double x);

struct SubnetWeights {
  Mat hidden;
  Mat output;

  Eigen::Index input_dim() const { return hidden.cols() - 1; }
  Eigen::Index hidden_units() const { return hidden.rows(); }
  Eigen::Index output_dim() const { return output.rows(); }
  Eigen::Index hidden_param_count() const { return hidden.size(); }
  Eigen::Index output_param_count() const { return output.size(); }
};

/// Intermediate values of one forward pass, reused by every Jacobian.
struct SubnetPass {
  Vec input;      // x with a trailing 1
  Vec preact;     // W_h · input
  Vec hidden;     // F(preact) with a trailing 1
  Vec slope;      // F'(preact)
  Vec curvature;  // F''(preact)
  Vec output;
};

SubnetPass subnet_pass(const SubnetWeights& w, Activation act, const Vec& x);

/// ŷ = W_o [F(W_h [x; 1]); 1]. Throws std::invalid_argument on shape
/// mismatch.
Vec subnet_forward(const SubnetWeights& w, Activation act, const Vec& x);

/// ∂ŷ/∂vec(W_o), d_out × d_out(P+1).
Mat output_weight_jacobian(const SubnetPass& pass);

/// ∂ŷ/∂vec(W_h), d_out × P(d_in+1).
Mat hidden_weight_jacobian(const SubnetWeights& w, const SubnetPass& pass);

/// ∂ŷ/∂x, d_out × d_in.
Mat input_jacobian(const SubnetWeights& w, const SubnetPass& pass);

enum class Term : std::size_t { M = 0, C = 1, G = 2 };
inline constexpr std::array<Term, 3> kTerms{Term::M, Term::C, Term::G};
const char* term_name(Term t);

struct NetworkShape {
  std::size_t dof = 2;
  Eigen::Index hidden_m = 8;
  Eigen::Index hidden_c = 8;
  Eigen::Index hidden_g = 8;
  Activation activation = Activation::Tanh;
};

struct NetworkBundle {
  std::size_t dof = 0;
  Activation activation = Activation::Tanh;
  std::array<SubnetWeights, 3> subnets;

  SubnetWeights& subnet(Term t) { return subnets[static_cast<std::size_t>(t)]; }
  const SubnetWeights& subnet(Term t) const {
    return subnets[static_cast<std::size_t>(t)];
  }
  Eigen::Index parameter_count() const;
};

/// Throws std::invalid_argument if subnet shapes disagree with dof.
void validate(const NetworkBundle& nets);

/// Seeded initialisation: every layer uniform in ±0.1/√fan_in, then the
/// M-subnet output bias is shifted so that M̂(q0) = inertia_level · I.
NetworkBundle make_network(const NetworkShape& shape, std::uint64_t seed,
                           double inertia_level, const Vec& q0);

/// Row-major flatten of a weight matrix.
Vec flatten(const Mat& m);
Mat unflatten(const Vec& v, Eigen::Index rows, Eigen::Index cols);

/// All weights as one vector: for M, C, G in order, hidden then output.
Vec parameter_vector(const NetworkBundle& nets);
void set_parameter_vector(NetworkBundle& nets, const Vec& theta);

struct TermsEstimate {
  Mat M_hat;
  Mat C_hat;
  Vec G_hat;
  Vec q;
  Vec qdot;
};

TermsEstimate assemble_terms(const NetworkBundle& nets, const Vec& q,
                             const Vec& qdot);

/// τ̂ = M̂ q̈ + Ĉ q̇ + Ĝ.
Vec predicted_torque(const NetworkBundle& nets, const Vec& q, const Vec& qdot,
                     const Vec& qddot);

/// ζ_i = ∂τ̂/∂vec(W_i^o) and ξ_i = ∂τ̂/∂vec(W_i^h), each N × (block size).
struct RegressorJacobians {
  std::array<Mat, 3> zeta;
  std::array<Mat, 3> xi;
};

RegressorJacobians regressor_jacobians(const NetworkBundle& nets, const Vec& q,
                                       const Vec& qdot, const Vec& qddot);

/// Maps a subnet's raw output to its contribution to τ̂ (N × d_out).
Mat torque_output_map(Term t, const Vec& qdot, const Vec& qddot);

/// dM̂/dt = Σ_k ∂M̂/∂q_k · q̇_k via the M-subnet input Jacobian.
Mat mhat_rate(const NetworkBundle& nets, const Vec& q, const Vec& qdot);

/// Jacobians of vec(dM̂/dt) (row-major, N² entries) with respect to the
/// M-subnet hidden and output weights.
struct RateJacobian {
  Vec rate;
  Mat hidden;
  Mat output;
};
RateJacobian mhat_rate_jacobian(const NetworkBundle& nets, const Vec& q,
                                const Vec& qdot);

// Weight snapshots: a small text format with one shape header per matrix
// followed by its rows, 17 significant digits.
//
//   nnid-weights 1
//   dof 2
//   activation tanh
//   M.hidden 8 3
//   <8 rows of 3 comma-separated values>
//   M.output 4 9
//   ...
void write_weights(std::ostream& os, const NetworkBundle& nets);
NetworkBundle read_weights(std::istream& is);
void save_weights(const std::string& path, const NetworkBundle& nets);
NetworkBundle load_weights(const std::string& path);

}  // namespace nnid
