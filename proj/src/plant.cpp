#include "nnid/plant.hpp"

#include <unsupported/Eigen/AutoDiff>

#include <cmath>
#include <numbers>

namespace nnid {

namespace {

using Deriv = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDof, 1>;
using AD = Eigen::AutoDiffScalar<Deriv>;

template <typename S>
using VecT = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <typename S>
using MatT = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

template <typename S>
MatT<S> planar_inertia(const PlantModel& m, const VecT<S>& q) {
  using std::cos;
  using std::sin;
  const auto n = static_cast<Eigen::Index>(m.dof);
  MatT<S> M = MatT<S>::Constant(n, n, S(0.0));

  std::vector<S> phi(m.dof);
  S acc(0.0);
  for (Eigen::Index k = 0; k < n; ++k) {
    acc = acc + q(k);
    phi[k] = acc;
  }

  // Linear velocity Jacobian columns of each link COM, then m·JᵀJ + I·wwᵀ.
  std::vector<S> jx(m.dof), jy(m.dof);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      S sx(0.0), sy(0.0);
      for (Eigen::Index k = j; k <= i; ++k) {
        const double r = (k < i) ? m.lengths[k] : m.com_offsets[k];
        sx = sx - r * sin(phi[k]);
        sy = sy + r * cos(phi[k]);
      }
      jx[j] = sx;
      jy[j] = sy;
    }
    for (Eigen::Index a = 0; a <= i; ++a) {
      for (Eigen::Index b = 0; b <= i; ++b) {
        M(a, b) = M(a, b) + m.masses[i] * (jx[a] * jx[b] + jy[a] * jy[b]) +
                  m.inertias[i];
      }
    }
  }
  return M;
}

template <typename S>
S planar_potential(const PlantModel& m, const VecT<S>& q) {
  using std::sin;
  S U(0.0), phi(0.0), y(0.0);
  for (std::size_t i = 0; i < m.dof; ++i) {
    phi = phi + q(static_cast<Eigen::Index>(i));
    U = U + m.masses[i] * m.gravity * (y + m.com_offsets[i] * sin(phi));
    y = y + m.lengths[i] * sin(phi);
  }
  return U;
}

// Yaw base + two pitch links modeled as slender rods. The rods' yaw inertia
// scales with cos² of their elevation; yaw and pitch motions decouple, so
// M(0,1) = M(0,2) = 0.
template <typename S>
MatT<S> anthropomorphic_inertia(const PlantModel& m, const VecT<S>& q) {
  using std::cos;
  const double m2 = m.masses[1], m3 = m.masses[2];
  const double l2 = m.lengths[1];
  const double lc2 = m.com_offsets[1], lc3 = m.com_offsets[2];
  const double I1 = m.inertias[0], I2 = m.inertias[1], I3 = m.inertias[2];

  const S c2 = cos(q(1));
  const S c3 = cos(q(2));
  const S c23 = cos(q(1) + q(2));
  const S r2 = lc2 * c2;
  const S r3 = l2 * c2 + lc3 * c23;

  MatT<S> M = MatT<S>::Constant(3, 3, S(0.0));
  M(0, 0) = I1 + m2 * r2 * r2 + I2 * c2 * c2 + m3 * r3 * r3 + I3 * c23 * c23;
  M(1, 1) = m2 * lc2 * lc2 + I2 +
            m3 * (l2 * l2 + lc3 * lc3 + 2.0 * l2 * lc3 * c3) + I3;
  M(1, 2) = m3 * (lc3 * lc3 + l2 * lc3 * c3) + I3;
  M(2, 1) = M(1, 2);
  M(2, 2) = S(m3 * lc3 * lc3 + I3);
  return M;
}

template <typename S>
S anthropomorphic_potential(const PlantModel& m, const VecT<S>& q) {
  using std::sin;
  const double g = m.gravity;
  const double l1 = m.lengths[0], l2 = m.lengths[1];
  const S s2 = sin(q(1));
  const S s23 = sin(q(1) + q(2));
  return m.masses[0] * g * m.com_offsets[0] +
         m.masses[1] * g * (l1 + m.com_offsets[1] * s2) +
         m.masses[2] * g * (l1 + l2 * s2 + m.com_offsets[2] * s23);
}

template <typename S>
MatT<S> inertia_t(const PlantModel& m, const VecT<S>& q) {
  return m.kind == PlantKind::Planar ? planar_inertia(m, q)
                                     : anthropomorphic_inertia(m, q);
}

template <typename S>
S potential_t(const PlantModel& m, const VecT<S>& q) {
  return m.kind == PlantKind::Planar ? planar_potential(m, q)
                                     : anthropomorphic_potential(m, q);
}

template <typename S>
VecT<S> tip_position(const PlantModel& m, const VecT<S>& q) {
  using std::cos;
  using std::sin;
  if (m.kind == PlantKind::Planar) {
    VecT<S> p = VecT<S>::Constant(2, S(0.0));
    S phi(0.0);
    for (std::size_t i = 0; i < m.dof; ++i) {
      phi = phi + q(static_cast<Eigen::Index>(i));
      p(0) = p(0) + m.lengths[i] * cos(phi);
      p(1) = p(1) + m.lengths[i] * sin(phi);
    }
    return p;
  }
  const S r = m.lengths[1] * cos(q(1)) + m.lengths[2] * cos(q(1) + q(2));
  VecT<S> p(3);
  p(0) = r * cos(q(0));
  p(1) = r * sin(q(0));
  p(2) = m.lengths[0] + m.lengths[1] * sin(q(1)) +
         m.lengths[2] * sin(q(1) + q(2));
  return p;
}

VecT<AD> seeded(const Vec& q) {
  const auto n = q.size();
  VecT<AD> out(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out(k) = AD(q(k), n, k);
  }
  return out;
}

void check_state(const PlantModel& model, const Vec& q, const Vec& qdot) {
  const auto n = static_cast<Eigen::Index>(model.dof);
  require_size(q, n, "q");
  require_size(qdot, n, "qdot");
  if (!all_finite(q) || !all_finite(qdot)) {
    throw std::invalid_argument("plant: non-finite joint state");
  }
}

}  // namespace

std::string to_string(PlantKind kind) {
  return kind == PlantKind::Planar ? "planar" : "anthropomorphic";
}

PlantKind plant_kind_from_string(const std::string& name) {
  if (name == "planar") return PlantKind::Planar;
  if (name == "anthropomorphic") return PlantKind::Anthropomorphic;
  throw ConfigError("unknown plant kind '" + name + "'");
}

void validate(const PlantModel& model) {
  if (model.dof < 1 || model.dof > kMaxDof) {
    throw std::invalid_argument("plant: dof must be in [1, 8]");
  }
  if (model.kind == PlantKind::Anthropomorphic && model.dof != 3) {
    throw std::invalid_argument("plant: anthropomorphic arm has 3 joints");
  }
  const auto check = [&](const std::vector<double>& v, const char* name,
                         bool strictly_positive) {
    if (v.size() != model.dof) {
      throw std::invalid_argument(std::string("plant: ") + name +
                                  " needs one entry per joint");
    }
    for (double x : v) {
      if (!std::isfinite(x) || (strictly_positive ? x <= 0.0 : x < 0.0)) {
        throw std::invalid_argument(std::string("plant: invalid ") + name);
      }
    }
  };
  check(model.masses, "masses", true);
  check(model.lengths, "lengths", true);
  check(model.com_offsets, "com_offsets", false);
  check(model.inertias, "inertias", false);
  check(model.friction, "friction", false);
  if (!std::isfinite(model.gravity)) {
    throw std::invalid_argument("plant: invalid gravity");
  }
}

PlantModel planar_arm(std::size_t dof) {
  PlantModel m;
  m.kind = PlantKind::Planar;
  m.dof = dof;
  for (std::size_t i = 0; i < dof; ++i) {
    const double mass = 1.0 - 0.2 * static_cast<double>(i) / std::max<std::size_t>(dof, 1);
    const double length = 0.5 - 0.1 * static_cast<double>(i) / std::max<std::size_t>(dof, 1);
    m.masses.push_back(mass);
    m.lengths.push_back(length);
    m.com_offsets.push_back(0.5 * length);
    m.inertias.push_back(mass * length * length / 12.0);
    m.friction.push_back(0.0);
  }
  return m;
}

PlantModel two_link_arm() { return planar_arm(2); }

PlantModel anthropomorphic_arm() {
  PlantModel m;
  m.kind = PlantKind::Anthropomorphic;
  m.dof = 3;
  m.masses = {0.5, 0.4, 0.3};
  m.lengths = {0.1, 0.3, 0.3};
  m.com_offsets = {0.05, 0.15, 0.15};
  m.inertias = {0.002, 0.4 * 0.09 / 12.0, 0.3 * 0.09 / 12.0};
  m.friction = {0.0, 0.0, 0.0};
  return m;
}

Mat inertia_matrix(const PlantModel& model, const Vec& q) {
  require_size(q, static_cast<Eigen::Index>(model.dof), "q");
  return inertia_t<double>(model, q);
}

double potential_energy(const PlantModel& model, const Vec& q) {
  require_size(q, static_cast<Eigen::Index>(model.dof), "q");
  return potential_t<double>(model, q);
}

std::vector<Mat> inertia_partials(const PlantModel& model, const Vec& q) {
  require_size(q, static_cast<Eigen::Index>(model.dof), "q");
  const auto n = static_cast<Eigen::Index>(model.dof);
  const MatT<AD> Mad = inertia_t<AD>(model, seeded(q));
  std::vector<Mat> dM(model.dof, Mat::Zero(n, n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& d = Mad(i, j).derivatives();
      for (Eigen::Index k = 0; k < d.size(); ++k) {
        dM[k](i, j) = d(k);
      }
    }
  }
  return dM;
}

DynamicsTerms ground_truth_terms(const PlantModel& model, const Vec& q,
                                 const Vec& qdot) {
  check_state(model, q, qdot);
  const auto n = static_cast<Eigen::Index>(model.dof);
  const VecT<AD> qa = seeded(q);
  const MatT<AD> Mad = inertia_t<AD>(model, qa);
  const AD U = potential_t<AD>(model, qa);

  DynamicsTerms out;
  out.M.resize(n, n);
  std::vector<Mat> dM(model.dof, Mat::Zero(n, n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out.M(i, j) = Mad(i, j).value();
      const auto& d = Mad(i, j).derivatives();
      for (Eigen::Index k = 0; k < d.size(); ++k) dM[k](i, j) = d(k);
    }
  }

  // C_kj = Σ_i Γ_ijk q̇_i,  Γ_ijk = ½(∂M_kj/∂q_i + ∂M_ki/∂q_j − ∂M_ij/∂q_k)
  out.C = Mat::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double c = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        c += 0.5 * (dM[i](k, j) + dM[j](k, i) - dM[k](i, j)) * qdot(i);
      }
      out.C(k, j) = c;
    }
  }

  out.G = Vec::Zero(n);
  const auto& dU = U.derivatives();
  for (Eigen::Index k = 0; k < dU.size(); ++k) out.G(k) = dU(k);
  return out;
}

Vec forward_dynamics(const PlantModel& model, const PlantState& state,
                     const Vec& tau) {
  const auto n = static_cast<Eigen::Index>(model.dof);
  require_size(tau, n, "tau");
  const DynamicsTerms terms = ground_truth_terms(model, state.q, state.qdot);

  const Eigen::SelfAdjointEigenSolver<Mat> eig(terms.M,
                                               Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12) {
    throw std::runtime_error("forward_dynamics: inertia matrix is singular "
                             "or ill-conditioned");
  }
  const Vec friction = Eigen::Map<const Vec>(model.friction.data(), n);
  const Vec rhs = tau - terms.C * state.qdot - terms.G -
                  friction.cwiseProduct(state.qdot);
  return terms.M.llt().solve(rhs);
}

PlantState integrate_step(const PlantModel& model, const PlantState& state,
                          const TorqueFn& tau_fn, double dt) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("integrate_step: dt must be positive");
  }
  struct Deriv2 {
    Vec dq;
    Vec dqd;
  };
  const auto f = [&](const PlantState& s) {
    return Deriv2{s.qdot, forward_dynamics(model, s, tau_fn(s))};
  };
  const auto offset = [&](const Deriv2& k, double h) {
    return PlantState{state.q + h * k.dq, state.qdot + h * k.dqd,
                      state.t + h};
  };

  const Deriv2 k1 = f(state);
  const Deriv2 k2 = f(offset(k1, 0.5 * dt));
  const Deriv2 k3 = f(offset(k2, 0.5 * dt));
  const Deriv2 k4 = f(offset(k3, dt));

  PlantState next;
  next.q = state.q + dt / 6.0 * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq);
  next.qdot =
      state.qdot + dt / 6.0 * (k1.dqd + 2.0 * k2.dqd + 2.0 * k3.dqd + k4.dqd);
  next.t = state.t + dt;
  if (!all_finite(next.q) || !all_finite(next.qdot)) {
    throw DivergenceError("integrate_step: non-finite state at t=" +
                              std::to_string(next.t),
                          static_cast<std::size_t>(std::llround(state.t / dt)));
  }
  return next;
}

double total_energy(const PlantModel& model, const PlantState& state) {
  const Mat M = inertia_matrix(model, state.q);
  return 0.5 * state.qdot.dot(M * state.qdot) +
         potential_energy(model, state.q);
}

Mat end_effector_jacobian(const PlantModel& model, const Vec& q) {
  require_size(q, static_cast<Eigen::Index>(model.dof), "q");
  const VecT<AD> p = tip_position<AD>(model, seeded(q));
  Mat J = Mat::Zero(p.size(), q.size());
  for (Eigen::Index r = 0; r < p.size(); ++r) {
    const auto& d = p(r).derivatives();
    for (Eigen::Index k = 0; k < d.size(); ++k) J(r, k) = d(k);
  }
  return J;
}

InertiaBand inertia_band(const PlantModel& model,
                         std::size_t points_per_joint) {
  // M is invariant to the first joint for both arm families.
  const std::size_t free_joints = model.dof - 1;
  std::size_t pts = std::max<std::size_t>(points_per_joint, 2);
  while (free_joints > 0 &&
         std::pow(static_cast<double>(pts), static_cast<double>(free_joints)) >
             2e5) {
    --pts;
  }
  std::size_t total = 1;
  for (std::size_t k = 0; k < free_joints; ++k) total *= pts;

  InertiaBand band{std::numeric_limits<double>::infinity(), 0.0};
  Vec q = Vec::Zero(static_cast<Eigen::Index>(model.dof));
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    for (std::size_t k = 0; k < free_joints; ++k) {
      const std::size_t c = rem % pts;
      rem /= pts;
      q(static_cast<Eigen::Index>(k + 1)) =
          -std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(c) /
                                  static_cast<double>(pts);
    }
    const Eigen::SelfAdjointEigenSolver<Mat> eig(inertia_matrix(model, q),
                                                 Eigen::EigenvaluesOnly);
    band.lower = std::min(band.lower, eig.eigenvalues().minCoeff());
    band.upper = std::max(band.upper, eig.eigenvalues().maxCoeff());
  }
  return band;
}

Reference excitation_reference(double t, const ExcitationSpec& spec) {
  const auto n = static_cast<Eigen::Index>(spec.size());
  Reference r{Vec::Zero(n), Vec::Zero(n), Vec::Zero(n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& joint = spec[static_cast<std::size_t>(j)];
    r.q(j) = joint.offset;
    for (const auto& s : joint.components) {
      const double arg = s.omega * t + s.phase;
      r.q(j) += s.amplitude * std::sin(arg);
      r.qdot(j) += s.amplitude * s.omega * std::cos(arg);
      r.qddot(j) -= s.amplitude * s.omega * s.omega * std::sin(arg);
    }
  }
  return r;
}

ExcitationSpec default_excitation(std::size_t dof) {
  ExcitationSpec spec(dof);
  for (std::size_t j = 0; j < dof; ++j) {
    const double k = static_cast<double>(j);
    spec[j].offset = (j == 0) ? -0.3 : 0.4;
    spec[j].components = {
        {0.6, 2.0 * std::numbers::pi * (0.21 + 0.07 * k), 0.0},
        {0.3, 2.0 * std::numbers::pi * (0.53 + 0.11 * k), 0.7 * k},
        {0.15, 2.0 * std::numbers::pi * (1.13 + 0.17 * k), 1.3 + k}};
  }
  return spec;
}

}  // namespace nnid
