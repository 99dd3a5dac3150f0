#include "nnid/kalman.hpp"

#include <cmath>

namespace nnid {

KinematicKalman make_kalman(double q0, const KalmanTuning& tuning) {
  KinematicKalman f;
  f.x << q0, 0.0, 0.0;
  f.P = Eigen::Vector3d(tuning.measurement_variance, tuning.initial_variance,
                        tuning.initial_variance)
            .asDiagonal();
  f.jerk_density = tuning.jerk_density;
  f.measurement_variance = tuning.measurement_variance;
  return f;
}

Eigen::Matrix3d kf_transition(double dt) {
  Eigen::Matrix3d F;
  F << 1.0, dt, 0.5 * dt * dt,
       0.0, 1.0, dt,
       0.0, 0.0, 1.0;
  return F;
}

Eigen::Matrix3d kf_process_noise(double jerk_density, double dt) {
  const double d2 = dt * dt, d3 = d2 * dt, d4 = d3 * dt, d5 = d4 * dt;
  Eigen::Matrix3d Q;
  Q << d5 / 20.0, d4 / 8.0, d3 / 6.0,
       d4 / 8.0,  d3 / 3.0, d2 / 2.0,
       d3 / 6.0,  d2 / 2.0, dt;
  return jerk_density * Q;
}

KinematicKalman kf_predict(const KinematicKalman& f, double dt) {
  if (dt < 0.0) throw std::invalid_argument("kf_predict: negative dt");
  KinematicKalman out = f;
  const Eigen::Matrix3d F = kf_transition(dt);
  out.x = F * f.x;
  out.P = F * f.P * F.transpose() + kf_process_noise(f.jerk_density, dt);
  out.P = (0.5 * (out.P + out.P.transpose())).eval();
  return out;
}

KinematicKalman kf_update(const KinematicKalman& f, double q_meas) {
  KinematicKalman out = f;
  const double S = f.P(0, 0) + f.measurement_variance;
  if (!(S > 0.0) || !std::isfinite(S)) return out;
  const Eigen::Vector3d K = f.P.col(0) / S;
  out.x = f.x + K * (q_meas - f.x(0));
  // Joseph form keeps P symmetric positive semidefinite.
  Eigen::Matrix3d IKH = Eigen::Matrix3d::Identity();
  IKH.col(0) -= K;
  out.P = IKH * f.P * IKH.transpose() +
          f.measurement_variance * K * K.transpose();
  out.P = (0.5 * (out.P + out.P.transpose())).eval();
  return out;
}

JointFilterBank::JointFilterBank(const Vec& q0, const KalmanTuning& tuning) {
  filters_.reserve(static_cast<std::size_t>(q0.size()));
  for (Eigen::Index j = 0; j < q0.size(); ++j) {
    filters_.push_back(make_kalman(q0(j), tuning));
  }
}

void JointFilterBank::step(const Vec& q_meas, double dt) {
  require_size(q_meas, static_cast<Eigen::Index>(filters_.size()),
               "filter measurement");
  for (std::size_t j = 0; j < filters_.size(); ++j) {
    filters_[j] = kf_update(kf_predict(filters_[j], dt),
                            q_meas(static_cast<Eigen::Index>(j)));
  }
}

namespace {

Vec component(const std::vector<KinematicKalman>& fs, int k) {
  Vec v(static_cast<Eigen::Index>(fs.size()));
  for (std::size_t j = 0; j < fs.size(); ++j) {
    v(static_cast<Eigen::Index>(j)) = fs[j].x(k);
  }
  return v;
}

}  // namespace

Vec JointFilterBank::position() const { return component(filters_, 0); }
Vec JointFilterBank::velocity() const { return component(filters_, 1); }
Vec JointFilterBank::acceleration() const { return component(filters_, 2); }

}  // namespace nnid
