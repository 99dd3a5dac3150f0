#include "nnid/learner.hpp"

#include <fmt/format.h>

#include <cmath>

namespace nnid {

std::string to_string(RobustMode m) {
  return m == RobustMode::DeadZone ? "dead_zone" : "sigma";
}

RobustMode robust_mode_from_string(const std::string& name) {
  if (name == "dead_zone") return RobustMode::DeadZone;
  if (name == "sigma") return RobustMode::Sigma;
  throw ConfigError("unknown robust modification '" + name + "'");
}

double LearningRates::hidden(Term t) const {
  switch (t) {
    case Term::M: return m_hidden;
    case Term::C: return c_hidden;
    case Term::G: return g_hidden;
  }
  return 0.0;
}

double LearningRates::output(Term t) const {
  switch (t) {
    case Term::M: return m_output;
    case Term::C: return c_output;
    case Term::G: return g_output;
  }
  return 0.0;
}

LearningRates LearningRates::scaled(double k) const {
  return {k * m_hidden, k * m_output, k * c_hidden,
          k * c_output, k * g_hidden, k * g_output};
}

std::optional<std::string> validate_hyperparams(const HyperParams& hp,
                                                ValidationPolicy policy) {
  if (!(hp.alpha > 0.0)) return "alpha must be positive";
  if (!(hp.dt > 0.0)) return "dt must be positive";
  if (!(hp.alpha * hp.dt < 2.0)) {
    return fmt::format("dt*alpha = {} must be below 2", hp.alpha * hp.dt);
  }
  if (!(hp.gamma > 1.0)) {
    return fmt::format("gamma = {} must be greater than 1", hp.gamma);
  }
  if (policy.enforce_gamma_le_alpha && hp.gamma > hp.alpha) {
    return fmt::format("gamma = {} must not exceed alpha = {}", hp.gamma,
                       hp.alpha);
  }
  const std::array<std::pair<const char*, double>, 3> lambdas{
      {{"lambda1", hp.lw.lambda1},
       {"lambda2", hp.lw.lambda2},
       {"lambda3", hp.lw.lambda3}}};
  for (const auto& [name, value] : lambdas) {
    if (!(value > 1.0)) {
      return fmt::format("{} = {} must be greater than 1", name, value);
    }
  }
  if (!(hp.nu0 >= 0.0) || !std::isfinite(hp.nu0)) {
    return "nu0 must be finite and non-negative";
  }
  const std::array<double, 6> rates{hp.rates.m_hidden, hp.rates.m_output,
                                    hp.rates.c_hidden, hp.rates.c_output,
                                    hp.rates.g_hidden, hp.rates.g_output};
  for (double r : rates) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
      return "learning rates must be finite and non-negative";
    }
  }
  if (!(hp.Gamma > 0.0)) return "Gamma must be positive";
  if (!(hp.sigma >= 0.0)) return "sigma must be non-negative";
  if (!(hp.region_buffer >= 1.0)) return "region_buffer must be at least 1";
  if (!std::isfinite(hp.lambda0)) return "lambda0 must be finite";
  return std::nullopt;
}

double dead_zone_radius(const HyperParams& hp) {
  return hp.gamma * hp.nu0 / hp.alpha;
}

bool dead_zone_gate(const Vec& e_mod, const HyperParams& hp) {
  return e_mod.norm() >= dead_zone_radius(hp);
}

// -----------------------------------------------------------------------------
// Residual
// -----------------------------------------------------------------------------

Residual evaluate_residual(const NetworkBundle& nets, const MotionSample& s,
                           const ResidualSettings& cfg, bool with_jacobian) {
  const auto n = static_cast<Eigen::Index>(nets.dof);
  require_size(s.q, n, "sample q");
  require_size(s.qdot, n, "sample qdot");
  require_size(s.qddot, n, "sample qddot");
  require_size(s.tau, n, "sample tau");

  Vec xc(2 * n);
  xc << s.q, s.qdot;
  const auto& wm = nets.subnet(Term::M);
  const auto& wc = nets.subnet(Term::C);
  const auto& wg = nets.subnet(Term::G);
  const SubnetPass pm = subnet_pass(wm, nets.activation, s.q);
  const SubnetPass pc = subnet_pass(wc, nets.activation, xc);
  const SubnetPass pg = subnet_pass(wg, nets.activation, s.q);

  Residual out;
  auto& est = out.estimate;
  est.M_hat = unflatten(pm.output, n, n);
  est.C_hat = unflatten(pc.output, n, n);
  est.G_hat = pg.output;
  est.q = s.q;
  est.qdot = s.qdot;

  const RateJacobian rate = mhat_rate_jacobian(nets, s.q, s.qdot);
  const Mat rate_mat = unflatten(rate.rate, n, n);
  const double scale = std::exp(cfg.lambda0 / s.t);

  auto& err = out.errors;
  err.e1 = torque_error(s, est);
  err.e2 = skew_diag_error(rate_mat, est.C_hat);
  err.e3 = skew_offdiag_error(rate_mat, est.C_hat);
  const InertiaBoundError ib =
      inertia_bound_error(est.M_hat, s.t, cfg.lambda0, cfg.band);
  err.e4 = ib.e4;
  err.band_penalty = ib.band_penalty;
  err.eps = stack_wae(err.e1, err.e2, err.e3, err.e4, cfg.lw);

  if (!with_jacobian) return out;

  const Eigen::Index rows = wae_length(n);
  const Eigen::Index off2 = n;
  const Eigen::Index off3 = 2 * n;
  const Eigen::Index off4 = 2 * n + pair_count(n);

  const std::array<const SubnetPass*, 3> passes{&pm, &pc, &pg};
  std::array<Mat, 3> dy_h, dy_o;
  for (Term t : kTerms) {
    const auto i = static_cast<std::size_t>(t);
    dy_h[i] = hidden_weight_jacobian(nets.subnet(t), *passes[i]);
    dy_o[i] = output_weight_jacobian(*passes[i]);
    out.jacobian.hidden[i] = Mat::Zero(rows, dy_h[i].cols());
    out.jacobian.output[i] = Mat::Zero(rows, dy_o[i].cols());
    const Mat A = torque_output_map(t, s.qdot, s.qddot);
    out.jacobian.hidden[i].topRows(n) = -A * dy_h[i];
    out.jacobian.output[i].topRows(n) = -A * dy_o[i];
  }

  const auto iM = static_cast<std::size_t>(Term::M);
  const auto iC = static_cast<std::size_t>(Term::C);
  auto& JMh = out.jacobian.hidden[iM];
  auto& JMo = out.jacobian.output[iM];
  auto& JCh = out.jacobian.hidden[iC];
  auto& JCo = out.jacobian.output[iC];

  const double l1 = cfg.lw.lambda1, l2 = cfg.lw.lambda2, l3 = cfg.lw.lambda3;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index d = k * n + k;
    JMh.row(off2 + k) = l1 * rate.hidden.row(d);
    JMo.row(off2 + k) = l1 * rate.output.row(d);
    JCh.row(off2 + k) = -2.0 * l1 * dy_h[iC].row(d);
    JCo.row(off2 + k) = -2.0 * l1 * dy_o[iC].row(d);
  }
  Eigen::Index m = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = i + 1; k < n; ++k, ++m) {
      const Eigen::Index a = k * n + i, b = i * n + k;
      JMh.row(off3 + m) = l2 * (rate.hidden.row(a) + rate.hidden.row(b));
      JMo.row(off3 + m) = l2 * (rate.output.row(a) + rate.output.row(b));
      JCh.row(off3 + m) = -2.0 * l2 * (dy_h[iC].row(a) + dy_h[iC].row(b));
      JCo.row(off3 + m) = -2.0 * l2 * (dy_o[iC].row(a) + dy_o[iC].row(b));
    }
  }

  // ∂e4/∂vec(M̂) by central differences, then chained through the M-subnet.
  Mat D(n, n * n);
  const double h = 1e-6 * std::max(1.0, est.M_hat.cwiseAbs().maxCoeff());
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      Mat plus = est.M_hat, minus = est.M_hat;
      plus(r, c) += h;
      minus(r, c) -= h;
      D.col(r * n + c) =
          (inertia_residual(plus, scale) - inertia_residual(minus, scale)) /
          (2.0 * h);
    }
  }
  JMh.middleRows(off4, n) = l3 * D * dy_h[iM];
  JMo.middleRows(off4, n) = l3 * D * dy_o[iM];
  return out;
}

NetworkBundle update_step(const NetworkBundle& nets, const Vec& eps,
                          const ResidualJacobian& jac, const HyperParams& hp,
                          bool gate) {
  NetworkBundle next = nets;
  if (!gate) {
    if (hp.robust == RobustMode::Sigma && hp.sigma > 0.0) {
      const double keep = 1.0 - hp.dt * hp.sigma;
      for (auto& s : next.subnets) {
        s.hidden *= keep;
        s.output *= keep;
      }
    }
    return next;
  }
  for (Term t : kTerms) {
    const auto i = static_cast<std::size_t>(t);
    auto& w = next.subnet(t);
    if (jac.hidden[i].rows() != eps.size() ||
        jac.hidden[i].cols() != w.hidden.size() ||
        jac.output[i].cols() != w.output.size()) {
      throw std::invalid_argument("update_step: Jacobian shape mismatch");
    }
    const Vec gh = jac.hidden[i].transpose() * eps;
    const Vec go = jac.output[i].transpose() * eps;
    w.hidden -= hp.dt * hp.rates.hidden(t) *
                unflatten(gh, w.hidden.rows(), w.hidden.cols());
    w.output -= hp.dt * hp.rates.output(t) *
                unflatten(go, w.output.rows(), w.output.cols());
    if (!all_finite(w.hidden) || !all_finite(w.output)) {
      throw std::runtime_error(fmt::format(
          "update_step: non-finite {}-subnet weights (learning rate too large?)",
          term_name(t)));
    }
  }
  return next;
}

// -----------------------------------------------------------------------------
// Lyapunov
// -----------------------------------------------------------------------------

double lyapunov_value(const Vec& e_mod, const Vec& theta, const Vec& theta_ref,
                      double Gamma) {
  return 0.5 * (e_mod.squaredNorm() + (theta - theta_ref).squaredNorm() / Gamma);
}

namespace {

Region classify(double e_norm, const HyperParams& hp) {
  const double r = dead_zone_radius(hp);
  if (e_norm < r) return Region::II;
  if (e_norm <= hp.region_buffer * r) return Region::III;
  return Region::IV;
}

}  // namespace

LyapunovReport lyapunov_monitor(const Vec& e_mod, const NetworkBundle& nets,
                                const Vec& theta_ref, const HyperParams& hp) {
  LyapunovReport rep;
  rep.V = lyapunov_value(e_mod, parameter_vector(nets), theta_ref, hp.Gamma);
  rep.in_dead_zone = !dead_zone_gate(e_mod, hp);
  rep.region = classify(e_mod.norm(), hp);
  return rep;
}

LyapunovMonitor::LyapunovMonitor(Vec theta_ref, HyperParams hp,
                                 std::size_t window)
    : theta_ref_(std::move(theta_ref)), hp_(hp), window_(window) {}

LyapunovReport LyapunovMonitor::observe(const Vec& e_mod,
                                        const NetworkBundle& nets) {
  const Vec theta = parameter_vector(nets);
  LyapunovReport rep;
  rep.V = lyapunov_value(e_mod, theta, theta_ref_, hp_.Gamma);
  rep.dV_estimate = previous_V_ ? (rep.V - *previous_V_) / hp_.dt : 0.0;
  previous_V_ = rep.V;
  rep.in_dead_zone = !dead_zone_gate(e_mod, hp_);
  const double e_norm = e_mod.norm();
  rep.region = classify(e_norm, hp_);

  const double floor = hp_.nu0 / hp_.alpha;
  if (hp_.nu0 > 0.0 && e_norm < floor) {
    if (quiet_steps_ == 0) quiet_start_norm_ = theta.norm();
    ++quiet_steps_;
    if (quiet_steps_ >= window_ && theta.norm() > quiet_start_norm_) {
      rep.region = Region::I;
    }
  } else {
    quiet_steps_ = 0;
  }
  return rep;
}

}  // namespace nnid
