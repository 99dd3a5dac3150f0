#include "nnid/control.hpp"

#include <fmt/format.h>

#include <cmath>
#include <cstring>
#include <random>

namespace nnid {

std::string to_string(ControllerKind k) {
  switch (k) {
    case ControllerKind::Proportional: return "p";
    case ControllerKind::Pd: return "pd";
    case ControllerKind::Nnidc: return "nnidc";
  }
  return "?";
}

ControllerKind controller_kind_from_string(const std::string& name) {
  if (name == "p") return ControllerKind::Proportional;
  if (name == "pd") return ControllerKind::Pd;
  if (name == "nnidc") return ControllerKind::Nnidc;
  throw ConfigError("unknown controller '" + name + "'");
}

void validate(const PdGains& gains, Eigen::Index dof) {
  if (gains.kp.size() != dof || gains.kd.size() != dof) {
    throw std::invalid_argument("gains: need one Kp and Kd entry per joint");
  }
  if (!all_finite(gains.kp) || !all_finite(gains.kd) ||
      (gains.kp.array() <= 0.0).any() || (gains.kd.array() <= 0.0).any()) {
    throw std::invalid_argument("gains: entries must be finite and positive");
  }
}

Vec proportional_controller(const Vec& q, const Vec& q_ref, const Vec& kp) {
  return kp.cwiseProduct(q_ref - q);
}

Vec pd_controller(const Vec& q, const Vec& qdot, const Vec& q_ref,
                  const Vec& qdot_ref, const PdGains& gains) {
  return gains.kp.cwiseProduct(q_ref - q) +
         gains.kd.cwiseProduct(qdot_ref - qdot);
}

NnidcOutput nnidc_controller(const Vec& q, const Vec& qdot,
                             const Reference& ref, const PdGains& gains,
                             const TermsEstimate& est) {
  const Eigen::JacobiSVD<Mat> svd(est.M_hat);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (!(smin > 0.0) || sv(0) / smin > kNnidcConditionLimit ||
      !all_finite(est.M_hat)) {
    return {pd_controller(q, qdot, ref.q, ref.qdot, gains), true};
  }
  const Vec v = ref.qddot + gains.kd.cwiseProduct(ref.qdot - qdot) +
                gains.kp.cwiseProduct(ref.q - q);
  return {est.M_hat * v + est.C_hat * qdot + est.G_hat, false};
}

BlockNorms block_norms(const NetworkBundle& nets) {
  BlockNorms out{};
  std::size_t k = 0;
  for (const auto& s : nets.subnets) {
    out[k++] = s.hidden.norm();
    out[k++] = s.output.norm();
  }
  return out;
}

namespace {

bool same_bits(const Vec& a, const Vec& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(),
                     static_cast<std::size_t>(a.size()) * sizeof(double)) == 0;
}

}  // namespace

RunLog run_identification_loop(const PlantModel& plant,
                               const NetworkBundle& nets,
                               const HyperParams& hp, const LoopConfig& cfg) {
  RunLog log;
  run_identification_loop(plant, nets, hp, cfg, log);
  return log;
}

void run_identification_loop(const PlantModel& plant,
                             const NetworkBundle& initial_nets,
                             const HyperParams& hp, const LoopConfig& cfg,
                             RunLog& log) {
  validate(plant);
  validate(initial_nets);
  const auto n = static_cast<Eigen::Index>(plant.dof);
  if (initial_nets.dof != plant.dof) {
    throw std::invalid_argument("loop: network and plant dof differ");
  }
  if (cfg.reference.size() != plant.dof) {
    throw std::invalid_argument("loop: reference needs one entry per joint");
  }
  if (!(cfg.duration >= 0.0)) {
    throw std::invalid_argument("loop: duration must be non-negative");
  }
  if (!(hp.dt > 0.0)) throw std::invalid_argument("loop: dt must be positive");
  if (cfg.controller == ControllerKind::Proportional) {
    if (cfg.gains.kp.size() != n || (cfg.gains.kp.array() <= 0.0).any()) {
      throw std::invalid_argument("loop: proportional gains must be positive");
    }
  } else {
    validate(cfg.gains, n);
  }

  const double dt = hp.dt;
  const auto steps = static_cast<std::size_t>(std::llround(cfg.duration / dt));

  log.dof = plant.dof;
  log.final_nets = initial_nets;
  log.steps.clear();
  log.steps.reserve(steps);
  if (steps == 0) return;

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const auto measure = [&](const Vec& q) {
    Vec z = q;
    if (cfg.noise_std > 0.0) {
      for (Eigen::Index j = 0; j < n; ++j) z(j) += cfg.noise_std * noise(rng);
    }
    return z;
  };

  NetworkBundle nets = initial_nets;
  const ResidualSettings settings{hp.lw, hp.lambda0, cfg.band};
  LyapunovMonitor monitor(cfg.theta_ref.value_or(parameter_vector(nets)), hp);

  struct Command {
    Vec tau;
    bool fallback = false;
  };
  const auto control = [&](double t, const Vec& q_f, const Vec& qd_f) {
    const Reference ref = excitation_reference(t, cfg.reference);
    switch (cfg.controller) {
      case ControllerKind::Proportional:
        return Command{proportional_controller(q_f, ref.q, cfg.gains.kp)};
      case ControllerKind::Pd:
        return Command{pd_controller(q_f, qd_f, ref.q, ref.qdot, cfg.gains)};
      case ControllerKind::Nnidc: {
        const NnidcOutput out = nnidc_controller(
            q_f, qd_f, ref, cfg.gains, assemble_terms(nets, q_f, qd_f));
        return Command{out.tau, out.fallback};
      }
    }
    return Command{};
  };

  PlantState state;
  state.q = cfg.q0.value_or(excitation_reference(0.0, cfg.reference).q);
  state.qdot = Vec::Zero(n);
  require_size(state.q, n, "loop q0");

  JointFilterBank bank(measure(state.q), cfg.kalman);
  Command cmd = control(0.0, bank.position(), bank.velocity());
  Vec e_mod = Vec::Zero(wae_length(n));
  Vec theta = parameter_vector(nets);

  const auto advance = [&](std::size_t k) {
    const Vec tau = cmd.tau;
    try {
      state = integrate_step(
          plant, state, [&tau](const PlantState&) { return tau; }, dt);
    } catch (const DivergenceError&) {
      throw DivergenceError("plant state diverged", k);
    } catch (const std::exception& e) {
      throw DivergenceError(e.what(), k);
    }
  };
  advance(0);

  const auto step = [&](std::size_t k) {
    StepRecord rec;
    rec.t = static_cast<double>(k) * dt;
    rec.q = state.q;
    rec.qdot = state.qdot;
    rec.tau = cmd.tau;
    rec.qddot = forward_dynamics(plant, state, cmd.tau);

    rec.q_meas = measure(state.q);
    bank.step(rec.q_meas, dt);
    rec.q_f = bank.position();
    rec.qdot_f = bank.velocity();
    rec.qddot_f = bank.acceleration();
    rec.q_ref = excitation_reference(rec.t, cfg.reference).q;

    const MotionSample sample{rec.t, rec.q_f, rec.qdot_f, rec.qddot_f, rec.tau};
    const Residual res = evaluate_residual(nets, sample, settings, cfg.learn);
    const auto& est = res.estimate;
    rec.tau_hat = est.M_hat * rec.qddot_f + est.C_hat * rec.qdot_f + est.G_hat;
    rec.e1 = res.errors.e1;
    rec.e2 = res.errors.e2;
    rec.e3 = res.errors.e3;
    rec.e4 = res.errors.e4;
    rec.eps_norm = res.errors.eps.norm();
    if (!std::isfinite(rec.eps_norm)) {
      throw DivergenceError("non-finite WAE", k);
    }

    e_mod = modified_error_step(e_mod, res.errors.eps, hp.alpha, dt);
    rec.emod_norm = e_mod.norm();
    rec.in_dead_zone = !dead_zone_gate(e_mod, hp);
    rec.gate = cfg.learn && !rec.in_dead_zone;

    if (cfg.learn) {
      nets = update_step(nets, res.errors.eps, res.jacobian, hp, rec.gate);
      const Vec next = parameter_vector(nets);
      rec.weights_changed = !same_bits(next, theta);
      rec.weight_step = (next - theta).norm();
      theta = next;
    }

    const LyapunovReport lyap = monitor.observe(e_mod, nets);
    rec.V = lyap.V;
    rec.dV = lyap.dV_estimate;
    rec.region = lyap.region;
    rec.weight_norms = block_norms(nets);

    const TermsEstimate at_truth = assemble_terms(nets, state.q, state.qdot);
    const DynamicsTerms truth = ground_truth_terms(plant, state.q, state.qdot);
    rec.err_M = (at_truth.M_hat - truth.M).norm();
    rec.err_C = (at_truth.C_hat - truth.C).norm();
    rec.err_G = (at_truth.G_hat - truth.G).norm();

    cmd = control(rec.t, rec.q_f, rec.qdot_f);
    rec.fallback = cmd.fallback;
    log.steps.push_back(std::move(rec));
  };

  for (std::size_t k = 1; k <= steps; ++k) {
    try {
      step(k);
    } catch (const DivergenceError&) {
      throw;
    } catch (const std::exception& e) {
      // Inputs were validated up front, so anything thrown here is the
      // closed loop blowing up.
      throw DivergenceError(e.what(), k);
    }
    log.final_nets = nets;
    if (k < steps) advance(k);
  }
}

std::vector<MotionSample> regressor_samples(const RunLog& log) {
  std::vector<MotionSample> out;
  out.reserve(log.steps.size());
  for (const auto& r : log.steps) {
    out.push_back({r.t, r.q_f, r.qdot_f, r.qddot_f, r.tau});
  }
  return out;
}

}  // namespace nnid
