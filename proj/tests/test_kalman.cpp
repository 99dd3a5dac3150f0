#include "nnid/kalman.hpp"

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numbers>
#include <random>

namespace nnid {
namespace {

// Van Loan discretisation of ẋ = A x + L w with white jerk w of density q.
Eigen::Matrix3d van_loan_noise(double q, double dt) {
  Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
  A(0, 1) = A(1, 2) = 1.0;
  Eigen::Matrix3d LQL = Eigen::Matrix3d::Zero();
  LQL(2, 2) = q;
  Eigen::Matrix<double, 6, 6> M = Eigen::Matrix<double, 6, 6>::Zero();
  M.topLeftCorner<3, 3>() = -A * dt;
  M.topRightCorner<3, 3>() = LQL * dt;
  M.bottomRightCorner<3, 3>() = A.transpose() * dt;
  const Eigen::Matrix<double, 6, 6> E = M.exp();
  const Eigen::Matrix3d F = E.bottomRightCorner<3, 3>().transpose();
  return F * E.topRightCorner<3, 3>();
}

TEST(Kalman, PredictionExactForConstantAcceleration) {
  KinematicKalman f;
  f.x << 0.3, -1.2, 2.5;
  f.P.setZero();
  f.jerk_density = 0.0;
  const double dt = 0.01;
  for (int k = 1; k <= 100; ++k) {
    f = kf_predict(f, dt);
    const double t = k * dt;
    EXPECT_NEAR(f.x(0), 0.3 - 1.2 * t + 1.25 * t * t, 1e-12);
    EXPECT_NEAR(f.x(1), -1.2 + 2.5 * t, 1e-12);
    EXPECT_EQ(f.x(2), 2.5);
    EXPECT_EQ(f.P.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Kalman, ZeroStepLeavesStateUnchanged) {
  const KinematicKalman f = make_kalman(0.7, {});
  const KinematicKalman g = kf_predict(f, 0.0);
  EXPECT_EQ(g.x, f.x);
  EXPECT_EQ(g.P, f.P);
  EXPECT_THROW(kf_predict(f, -1e-3), std::invalid_argument);
}

TEST(Kalman, ProcessNoiseMatchesVanLoan) {
  for (double q : {1.0, 1e3, 1e6}) {
    for (double dt : {1e-3, 1e-2, 0.1}) {
      const Eigen::Matrix3d Q = kf_process_noise(q, dt);
      const Eigen::Matrix3d want = van_loan_noise(q, dt);
      EXPECT_LT((Q - want).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, want.cwiseAbs().maxCoeff()));
    }
  }
}

TEST(Kalman, CovarianceGrowthMatchesVanLoan) {
  KinematicKalman f = make_kalman(0.0, {1e4, 1e-6, 0.5});
  const double dt = 1e-3;
  const Eigen::Matrix3d F = kf_transition(dt);
  const Eigen::Matrix3d want = F * f.P * F.transpose() + van_loan_noise(1e4, dt);
  EXPECT_LT((kf_predict(f, dt).P - want).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Kalman, MeasurementLimits) {
  KinematicKalman f = make_kalman(0.2, {1e4, 1e-6, 1.0});
  f = kf_predict(f, 1e-3);
  KinematicKalman vague = f;
  vague.measurement_variance = 1e30;
  const KinematicKalman a = kf_update(vague, 5.0);
  EXPECT_LT((a.x - f.x).cwiseAbs().maxCoeff(), 1e-20);
  KinematicKalman sharp = f;
  sharp.measurement_variance = 1e-30;
  EXPECT_NEAR(kf_update(sharp, 5.0).x(0), 5.0, 1e-12);
}

TEST(Kalman, CovarianceStaysPositiveSemidefinite) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 1e-3);
  KinematicKalman f = make_kalman(0.0, {1e6, 1e-6, 1.0});
  for (int k = 1; k <= 20000; ++k) {
    f = kf_update(kf_predict(f, 1e-3), std::sin(3.0 * k * 1e-3) + noise(rng));
    ASSERT_EQ(f.P, f.P.transpose());
    ASSERT_GE(Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(f.P).eigenvalues().minCoeff(), -1e-15);
  }
}

TEST(Kalman, UnbiasedOnQuadraticTruth) {
  KinematicKalman f = make_kalman(0.0, {1e2, 1e-8, 1.0});
  const auto truth = [](double t) { return Eigen::Vector3d(0.5 - 0.8 * t + 0.9 * t * t, -0.8 + 1.8 * t, 1.8); };
  for (int k = 1; k <= 5000; ++k) {
    f = kf_update(kf_predict(f, 1e-3), truth(k * 1e-3)(0));
  }
  const Eigen::Vector3d err = f.x - truth(5.0);
  EXPECT_LT(std::abs(err(0)), 1e-9);
  EXPECT_LT(std::abs(err(1)), 1e-7);
  EXPECT_LT(std::abs(err(2)), 1e-5);
}

TEST(Kalman, BeatsCentralDifferenceOnNoisySine) {
  const double dt = 1e-3, sigma = 1e-3;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> noise(0.0, sigma);
  const auto q = [](double t) { return std::sin(2 * std::numbers::pi * t); };
  const auto v = [](double t) { return 2 * std::numbers::pi * std::cos(2 * std::numbers::pi * t); };
  std::vector<double> meas;
  for (int k = 0; k <= 5000; ++k) meas.push_back(q(k * dt) + noise(rng));

  KinematicKalman f = make_kalman(meas[0], {1e4, sigma * sigma, 1.0});
  double kf_sq = 0.0, cd_sq = 0.0;
  int count = 0;
  for (int k = 1; k < 5000; ++k) {
    f = kf_update(kf_predict(f, dt), meas[static_cast<std::size_t>(k)]);
    if (k < 2000) continue;  // steady state only
    const double cd = (meas[static_cast<std::size_t>(k + 1)] - meas[static_cast<std::size_t>(k - 1)]) / (2 * dt);
    kf_sq += std::pow(f.x(1) - v(k * dt), 2);
    cd_sq += std::pow(cd - v(k * dt), 2);
    ++count;
  }
  EXPECT_LT(std::sqrt(kf_sq / count), std::sqrt(cd_sq / count));
}

TEST(Kalman, FilterBankRunsJointsIndependently) {
  const KalmanTuning tuning{1e5, 1e-8, 1.0};
  JointFilterBank bank(Vec(Eigen::Vector2d(0.1, -0.2)), tuning);
  KinematicKalman a = make_kalman(0.1, tuning), b = make_kalman(-0.2, tuning);
  for (int k = 1; k <= 100; ++k) {
    const double t = k * 1e-3;
    bank.step(Vec(Eigen::Vector2d(0.1 + t, -0.2 + t * t)), 1e-3);
    a = kf_update(kf_predict(a, 1e-3), 0.1 + t);
    b = kf_update(kf_predict(b, 1e-3), -0.2 + t * t);
  }
  EXPECT_EQ(bank.position(), Vec(Eigen::Vector2d(a.x(0), b.x(0))));
  EXPECT_EQ(bank.velocity(), Vec(Eigen::Vector2d(a.x(1), b.x(1))));
  EXPECT_EQ(bank.acceleration(), Vec(Eigen::Vector2d(a.x(2), b.x(2))));
  EXPECT_THROW(bank.step(Vec::Zero(3), 1e-3), std::invalid_argument);
}

}  // namespace
}  // namespace nnid
