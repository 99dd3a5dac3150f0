// Per-joint constant-acceleration Kalman filter producing smoothed position,
// velocity and acceleration regressors from position measurements.
#pragma once

#include "nnid/types.hpp"

#include <vector>

namespace nnid {

struct KalmanTuning {
  double jerk_density = 1e6;         // rad²/s⁵, white-jerk spectral density
  double measurement_variance = 1e-10;  // rad²
  double initial_variance = 1.0;     // prior variance on velocity/acceleration
};

/// State [q, q̇, q̈] of one joint with its covariance.
struct KinematicKalman {
  Eigen::Vector3d x = Eigen::Vector3d::Zero();
  Eigen::Matrix3d P = Eigen::Matrix3d::Identity();
  double jerk_density = 1e6;
  double measurement_variance = 1e-10;
};

KinematicKalman make_kalman(double q0, const KalmanTuning& tuning);

/// Constant-acceleration transition for step dt.
Eigen::Matrix3d kf_transition(double dt);

/// Discretised white-jerk process noise for step dt.
Eigen::Matrix3d kf_process_noise(double jerk_density, double dt);

KinematicKalman kf_predict(const KinematicKalman& f, double dt);

/// Position-only measurement update in Joseph form.
KinematicKalman kf_update(const KinematicKalman& f, double q_meas);

/// Independent filters for every joint of an arm.
class JointFilterBank {
 public:
  JointFilterBank(const Vec& q0, const KalmanTuning& tuning);

  /// Predict by dt, then update with the measurement vector.
  void step(const Vec& q_meas, double dt);

  Vec position() const;
  Vec velocity() const;
  Vec acceleration() const;
  const std::vector<KinematicKalman>& filters() const { return filters_; }

 private:
  std::vector<KinematicKalman> filters_;
};

}  // namespace nnid
