// Analytic serial-manipulator plant used as ground truth for identification.
//
// The plant provides M(q), C(q, q̇) and G(q) for two arm families:
//   - planar N-link arms moving in a vertical plane (default: 2 links),
//   - a 3-DOF anthropomorphic arm (yaw base, shoulder and elbow pitch).
// M and the potential energy are written once as templates and
// differentiated with forward-mode autodiff; C is then assembled from
// Christoffel symbols so that Ṁ − 2C is skew-symmetric, and G is ∇U.
#pragma once

#include "nnid/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace nnid {

inline constexpr std::size_t kMaxDof = 8;

enum class PlantKind { Planar, Anthropomorphic };

std::string to_string(PlantKind kind);
PlantKind plant_kind_from_string(const std::string& name);

/// Rigid serial arm description.
///
/// For planar arms joint i rotates about the plane normal and q = 0 lays the
/// arm out horizontally. For the anthropomorphic arm lengths[0] is the base
/// column height, inertias[0] is the base yaw inertia, and links 2 and 3 are
/// slender rods with transverse inertia inertias[1], inertias[2] about COM.
struct PlantModel {
  PlantKind kind = PlantKind::Planar;
  std::size_t dof = 2;
  std::vector<double> masses;       // kg
  std::vector<double> lengths;      // m
  std::vector<double> com_offsets;  // m, along each link from its joint
  std::vector<double> inertias;     // kg·m², about the link COM
  double gravity = 9.81;            // m/s²
  std::vector<double> friction;     // N·m·s/rad, viscous, per joint
};

/// Throws std::invalid_argument if the model violates its invariants.
void validate(const PlantModel& model);

PlantModel planar_arm(std::size_t dof);
PlantModel two_link_arm();
PlantModel anthropomorphic_arm();

struct PlantState {
  Vec q;
  Vec qdot;
  double t = 0.0;
};

/// One timestamped regressor record.
struct MotionSample {
  double t = 0.0;
  Vec q;
  Vec qdot;
  Vec qddot;
  Vec tau;
};

struct DynamicsTerms {
  Mat M;
  Mat C;
  Vec G;
};

// =============================================================================
// Dynamics
// =============================================================================

Mat inertia_matrix(const PlantModel& model, const Vec& q);
double potential_energy(const PlantModel& model, const Vec& q);

/// ∂M/∂q_k for k = 0..N-1.
std::vector<Mat> inertia_partials(const PlantModel& model, const Vec& q);

/// M, Christoffel-form C and G at (q, q̇).
DynamicsTerms ground_truth_terms(const PlantModel& model, const Vec& q,
                                 const Vec& qdot);

/// Solves M q̈ = τ − C q̇ − G − B q̇ for q̈.
/// Throws std::runtime_error when cond(M) exceeds 1e12.
Vec forward_dynamics(const PlantModel& model, const PlantState& state,
                     const Vec& tau);

using TorqueFn = std::function<Vec(const PlantState&)>;

/// One classical RK4 step of (q, q̇). Throws DivergenceError on a
/// non-finite result.
PlantState integrate_step(const PlantModel& model, const PlantState& state,
                          const TorqueFn& tau_fn, double dt);

/// Kinetic plus potential energy.
double total_energy(const PlantModel& model, const PlantState& state);

/// Jacobian of the tool-tip position (bookkeeping only; identification works
/// in joint space).
Mat end_effector_jacobian(const PlantModel& model, const Vec& q);

struct InertiaBand {
  double lower = 0.0;
  double upper = 0.0;
};

/// Extreme eigenvalues of M over a uniform grid with `points_per_joint`
/// samples of each joint in [−π, π).
InertiaBand inertia_band(const PlantModel& model,
                         std::size_t points_per_joint = 24);

// =============================================================================
// Excitation references
// =============================================================================

struct Sinusoid {
  double amplitude = 0.0;  // rad
  double omega = 0.0;      // rad/s
  double phase = 0.0;      // rad
};

struct JointExcitation {
  double offset = 0.0;
  std::vector<Sinusoid> components;
};

using ExcitationSpec = std::vector<JointExcitation>;

struct Reference {
  Vec q;
  Vec qdot;
  Vec qddot;
};

/// Evaluates a sum-of-sinusoids reference and its exact derivatives.
Reference excitation_reference(double t, const ExcitationSpec& spec);

/// Default multi-sine reference for an N-joint arm.
ExcitationSpec default_excitation(std::size_t dof);

}  // namespace nnid
