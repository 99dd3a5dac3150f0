#include "nnid/learner.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace nnid {
namespace {

using test::max_abs;
using test::uniform;

NetworkBundle random_net(std::mt19937_64& rng, std::size_t dof) {
  NetworkBundle nets = make_network({dof, 4, 4, 4, Activation::Tanh}, rng(), 0.5,
                                    Vec::Zero(static_cast<Eigen::Index>(dof)));
  set_parameter_vector(nets, uniform(rng, nets.parameter_count(), -0.6, 0.6));
  return nets;
}

MotionSample random_sample(std::mt19937_64& rng, Eigen::Index n, double t) {
  return {t, uniform(rng, n, -1, 1), uniform(rng, n, -2, 2), uniform(rng, n, -2, 2),
          uniform(rng, n, -4, 4)};
}

std::string reason(const HyperParams& hp, ValidationPolicy policy = {}) {
  return validate_hyperparams(hp, policy).value_or("");
}

TEST(Hyperparams, DefaultsAreAdmissible) {
  EXPECT_FALSE(validate_hyperparams(HyperParams{}).has_value());
}

TEST(Hyperparams, GammaRules) {
  HyperParams hp;
  hp.gamma = 1.0;
  EXPECT_NE(reason(hp).find("gamma"), std::string::npos);
  hp.gamma = hp.alpha;
  EXPECT_FALSE(validate_hyperparams(hp).has_value());
  hp.gamma = hp.alpha + 0.5;
  EXPECT_NE(reason(hp).find("must not exceed alpha"), std::string::npos);
  EXPECT_FALSE(validate_hyperparams(hp, {.enforce_gamma_le_alpha = false}).has_value());
}

TEST(Hyperparams, LagrangianWeightsMustExceedOne) {
  for (int i = 0; i < 3; ++i) {
    HyperParams hp;
    (i == 0 ? hp.lw.lambda1 : i == 1 ? hp.lw.lambda2 : hp.lw.lambda3) = 0.5;
    EXPECT_NE(reason(hp).find("lambda" + std::to_string(i + 1)), std::string::npos);
  }
}

TEST(Hyperparams, FilterStability) {
  HyperParams hp;
  hp.alpha = 2000.0;
  hp.gamma = 2.0;
  EXPECT_NE(reason(hp).find("dt*alpha"), std::string::npos);
  hp.alpha = 1999.0;
  EXPECT_FALSE(validate_hyperparams(hp).has_value());
}

TEST(Hyperparams, OtherRanges) {
  HyperParams hp;
  hp.nu0 = -1.0;
  EXPECT_TRUE(validate_hyperparams(hp).has_value());
  hp = {};
  hp.rates.g_output = -1.0;
  EXPECT_TRUE(validate_hyperparams(hp).has_value());
  hp = {};
  hp.Gamma = 0.0;
  EXPECT_TRUE(validate_hyperparams(hp).has_value());
}

TEST(DeadZone, Gate) {
  HyperParams hp;
  hp.alpha = 10.0;
  hp.gamma = 2.0;
  hp.nu0 = 0.5;
  EXPECT_FALSE(dead_zone_gate(Vec::Zero(3), hp));
  EXPECT_TRUE(dead_zone_gate(Vec::Constant(1, dead_zone_radius(hp)), hp));
  EXPECT_FALSE(dead_zone_gate(Vec::Constant(1, std::nextafter(dead_zone_radius(hp), 0.0)), hp));
  hp.nu0 = 0.0;
  EXPECT_TRUE(dead_zone_gate(Vec::Zero(3), hp));
}

TEST(Residual, JacobianMatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  for (std::size_t dof : {1u, 2u, 3u}) {
    const auto n = static_cast<Eigen::Index>(dof);
    const NetworkBundle nets = random_net(rng, dof);
    const MotionSample s = random_sample(rng, n, 0.8);
    const ResidualSettings cfg{{1.5, 2.0, 2.5}, -0.1, {0.1, 2.0}};
    const Residual res = evaluate_residual(nets, s, cfg, true);
    ASSERT_EQ(res.errors.eps.size(), wae_length(n));
    const Vec theta = parameter_vector(nets);
    const Mat J = [&] {
      Mat full(res.errors.eps.size(), theta.size());
      Eigen::Index col = 0;
      for (Term t : kTerms) {
        const auto i = static_cast<std::size_t>(t);
        full.middleCols(col, res.jacobian.hidden[i].cols()) = res.jacobian.hidden[i];
        col += res.jacobian.hidden[i].cols();
        full.middleCols(col, res.jacobian.output[i].cols()) = res.jacobian.output[i];
        col += res.jacobian.output[i].cols();
      }
      return full;
    }();
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      const Vec fd = test::diff5(
          [&](double h) -> Vec {
            NetworkBundle m = nets;
            set_parameter_vector(m, theta + h * Vec::Unit(theta.size(), k));
            return evaluate_residual(m, s, cfg, false).errors.eps;
          },
          1e-4);
      const double scale = std::max(1.0, max_abs(fd));
      // e4 is itself differentiated numerically inside evaluate_residual.
      EXPECT_LT(max_abs(J.col(k) - fd) / scale, 1e-6) << "dof " << dof << " param " << k;
    }
  }
}

TEST(Update, NoChangeWithoutResidualOrRate) {
  std::mt19937_64 rng(4);
  const NetworkBundle nets = random_net(rng, 2);
  const MotionSample s = random_sample(rng, 2, 1.0);
  const Residual res = evaluate_residual(nets, s, {{}, -0.1, {0.1, 2}}, true);
  HyperParams hp;
  const NetworkBundle a = update_step(nets, Vec::Zero(res.errors.eps.size()), res.jacobian, hp, true);
  EXPECT_EQ(parameter_vector(a), parameter_vector(nets));
  hp.rates = hp.rates.scaled(0.0);
  const NetworkBundle b = update_step(nets, res.errors.eps, res.jacobian, hp, true);
  EXPECT_EQ(parameter_vector(b), parameter_vector(nets));
  const NetworkBundle c = update_step(nets, res.errors.eps, res.jacobian, HyperParams{}, false);
  EXPECT_EQ(parameter_vector(c), parameter_vector(nets));
}

TEST(Update, SigmaLeakageInsideBall) {
  std::mt19937_64 rng(5);
  const NetworkBundle nets = random_net(rng, 2);
  const Residual res = evaluate_residual(nets, random_sample(rng, 2, 1.0), {{}, -0.1, {0.1, 2}}, true);
  HyperParams hp;
  hp.robust = RobustMode::Sigma;
  hp.sigma = 0.5;
  const NetworkBundle next = update_step(nets, res.errors.eps, res.jacobian, hp, false);
  EXPECT_LT(max_abs(parameter_vector(next) - (1.0 - hp.dt * hp.sigma) * parameter_vector(nets)), 1e-15);
}

TEST(Update, TorqueOnlyStepIsGradientDescent) {
  // With the constraint blocks weighted by zero the update must be one
  // explicit-Euler step of −rate·∇½‖e1‖² in every weight block.
  std::mt19937_64 rng(6);
  const NetworkBundle nets = random_net(rng, 2);
  const MotionSample s = random_sample(rng, 2, 1.0);
  const ResidualSettings cfg{{0.0, 0.0, 0.0}, -0.1, {0.1, 2}};
  const Residual res = evaluate_residual(nets, s, cfg, true);
  HyperParams hp;
  hp.rates = {0.3, 0.7, 1.1, 1.3, 1.7, 1.9};
  const Vec got = parameter_vector(update_step(nets, res.errors.eps, res.jacobian, hp, true));

  const Vec theta = parameter_vector(nets);
  Vec rate(theta.size());
  Eigen::Index off = 0;
  for (Term t : kTerms) {
    const auto& w = nets.subnet(t);
    rate.segment(off, w.hidden.size()).setConstant(hp.rates.hidden(t));
    off += w.hidden.size();
    rate.segment(off, w.output.size()).setConstant(hp.rates.output(t));
    off += w.output.size();
  }
  Vec grad(theta.size());
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    grad(k) = test::diff5(
        [&](double h) {
          NetworkBundle m = nets;
          set_parameter_vector(m, theta + h * Vec::Unit(theta.size(), k));
          return 0.5 * torque_error(s, assemble_terms(m, s.q, s.qdot)).squaredNorm();
        },
        1e-4);
  }
  const Vec want = theta - hp.dt * rate.cwiseProduct(grad);
  EXPECT_LT(max_abs(got - want), 1e-10);
}

TEST(Residual, GroundTruthFixedPoint) {
  // One joint without gravity: M is a constant, C and G vanish, so a net
  // with dead hidden paths and the right output biases is an exact fit.
  PlantModel p = planar_arm(1);
  p.gravity = 0.0;
  NetworkBundle nets = make_network({1, 3, 3, 3, Activation::Tanh}, 2, 1.0, Vec::Zero(1));
  for (auto& w : nets.subnets) w.output.setZero();
  const double m = inertia_matrix(p, Vec::Zero(1))(0, 0);
  nets.subnet(Term::M).output(0, 3) = m;
  std::mt19937_64 rng(7);
  HyperParams hp;
  hp.nu0 = 1e-3;
  Vec e_mod = Vec::Zero(wae_length(1));
  for (int k = 0; k < 2000; ++k) {
    MotionSample s = random_sample(rng, 1, 1e4 + k * hp.dt);
    s.tau = Vec::Constant(1, m * s.qddot(0));
    const Residual r = evaluate_residual(nets, s, {hp.lw, hp.lambda0, {0.1, 2}}, false);
    EXPECT_LT(max_abs(r.errors.e1), 1e-12);
    EXPECT_LT(max_abs(r.errors.e2), 1e-12);
    // The eigenvalue scale exp(λ0/t) differs from 1 by ~λ0/t.
    EXPECT_LT(max_abs(r.errors.e4), 2e-5 * m);
    e_mod = modified_error_step(e_mod, r.errors.eps, hp.alpha, hp.dt);
  }
  EXPECT_FALSE(dead_zone_gate(e_mod, hp));
}

TEST(Lyapunov, ValueProperties) {
  std::mt19937_64 rng(8);
  const NetworkBundle nets = random_net(rng, 2);
  const Vec theta = parameter_vector(nets);
  HyperParams hp;
  EXPECT_EQ(lyapunov_monitor(Vec::Zero(7), nets, theta, hp).V, 0.0);
  for (int k = 0; k < 50; ++k) {
    const Vec e = uniform(rng, 7, -1, 1);
    const Vec ref = uniform(rng, theta.size(), -1, 1);
    const double V = lyapunov_value(e, theta, ref, 0.5);
    EXPECT_GE(V, 0.0);
    EXPECT_NEAR(V, 0.5 * (e.squaredNorm() + 2.0 * (theta - ref).squaredNorm()), 1e-12);
  }
}

TEST(Lyapunov, RegionsAndFiniteDifference) {
  std::mt19937_64 rng(9);
  const NetworkBundle nets = random_net(rng, 1);
  HyperParams hp;
  hp.nu0 = 0.5;  // radius γν0/α = 0.1, region III up to 0.3
  LyapunovMonitor mon(parameter_vector(nets), hp, 10);
  const auto e = [](double v) { return Vec::Constant(1, v); };
  const LyapunovReport a = mon.observe(e(0.05), nets);
  EXPECT_EQ(a.region, Region::II);
  EXPECT_TRUE(a.in_dead_zone);
  EXPECT_EQ(a.dV_estimate, 0.0);
  const LyapunovReport b = mon.observe(e(0.2), nets);
  EXPECT_EQ(b.region, Region::III);
  EXPECT_NEAR(b.dV_estimate, (b.V - a.V) / hp.dt, 1e-9);
  EXPECT_EQ(mon.observe(e(0.1), nets).region, Region::III);
  EXPECT_EQ(mon.observe(e(0.31), nets).region, Region::IV);
}

TEST(Lyapunov, RegionOneHeuristic) {
  std::mt19937_64 rng(10);
  NetworkBundle nets = random_net(rng, 1);
  HyperParams hp;
  hp.nu0 = 0.5;
  LyapunovMonitor mon(parameter_vector(nets), hp, 5);
  const Vec quiet = Vec::Constant(1, 0.01);  // below ν0/α = 0.05
  Region last = Region::IV;
  for (int k = 0; k < 8; ++k) {
    set_parameter_vector(nets, 1.01 * parameter_vector(nets));
    last = mon.observe(quiet, nets).region;
  }
  EXPECT_EQ(last, Region::I);
  // Shrinking weights never raise the flag.
  LyapunovMonitor calm(parameter_vector(nets), hp, 5);
  for (int k = 0; k < 8; ++k) {
    set_parameter_vector(nets, 0.99 * parameter_vector(nets));
    EXPECT_NE(calm.observe(quiet, nets).region, Region::I);
  }
}

TEST(RobustMode, Names) {
  EXPECT_EQ(robust_mode_from_string("dead_zone"), RobustMode::DeadZone);
  EXPECT_EQ(robust_mode_from_string("sigma"), RobustMode::Sigma);
  EXPECT_THROW(robust_mode_from_string("projection"), ConfigError);
}

}  // namespace
}  // namespace nnid
