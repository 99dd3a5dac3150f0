#include "nnid/errors.hpp"

#include <cmath>

namespace nnid {

Vec torque_error(const MotionSample& sample, const TermsEstimate& est) {
  const Eigen::Index n = est.G_hat.size();
  require_size(sample.tau, n, "torque_error tau");
  require_size(sample.qddot, n, "torque_error qddot");
  require_size(sample.qdot, n, "torque_error qdot");
  return sample.tau - est.M_hat * sample.qddot - est.C_hat * sample.qdot -
         est.G_hat;
}

Vec skew_diag_error(const Mat& mhat_rate, const Mat& C_hat) {
  return mhat_rate.diagonal() - 2.0 * C_hat.diagonal();
}

Vec skew_offdiag_error(const Mat& mhat_rate, const Mat& C_hat) {
  const Eigen::Index n = C_hat.rows();
  Vec e3(pair_count(n));
  Eigen::Index m = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = i + 1; k < n; ++k) {
      e3(m++) = mhat_rate(k, i) + mhat_rate(i, k) -
                2.0 * (C_hat(k, i) + C_hat(i, k));
    }
  }
  return e3;
}

Vec inertia_residual(const Mat& M_hat, double scale) {
  const Eigen::Index n = M_hat.rows();
  const Mat sym = 0.5 * (M_hat + M_hat.transpose());
  const Eigen::SelfAdjointEigenSolver<Mat> eig(sym, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("inertia_bound_error: eigensolver failed");
  }
  Vec e4(n);
  const Mat I = Mat::Identity(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double lambda = eig.eigenvalues()(k) * scale;
    e4(k) = std::abs((M_hat - lambda * I).determinant());
  }
  return e4;
}

InertiaBoundError inertia_bound_error(const Mat& M_hat, double t,
                                      double lambda0,
                                      const InertiaBand& band) {
  if (M_hat.rows() != M_hat.cols()) {
    throw std::invalid_argument("inertia_bound_error: M_hat must be square");
  }
  if (!(t > 0.0)) {
    throw std::invalid_argument("inertia_bound_error: t must be positive");
  }
  InertiaBoundError out;
  out.e4 = inertia_residual(M_hat, std::exp(lambda0 / t));

  const Mat sym = 0.5 * (M_hat + M_hat.transpose());
  const Eigen::SelfAdjointEigenSolver<Mat> eig(sym, Eigen::EigenvaluesOnly);
  for (Eigen::Index k = 0; k < sym.rows(); ++k) {
    const double v = eig.eigenvalues()(k);
    const double below = std::max(0.0, band.lower - v);
    const double above = std::max(0.0, v - band.upper);
    out.band_penalty += below * below + above * above;
  }
  return out;
}

Vec stack_wae(const Vec& e1, const Vec& e2, const Vec& e3, const Vec& e4,
              const LagrangianWeights& lw) {
  Vec eps(e1.size() + e2.size() + e3.size() + e4.size());
  eps << e1, lw.lambda1 * e2, lw.lambda2 * e3, lw.lambda3 * e4;
  return eps;
}

Vec modified_error_step(const Vec& e_mod, const Vec& eps, double alpha,
                        double dt) {
  if (!(alpha > 0.0)) {
    throw ConfigError("modified_error_step: alpha must be positive");
  }
  if (!(alpha * dt < 2.0)) {
    throw ConfigError("modified_error_step: alpha*dt must be below 2");
  }
  if (e_mod.size() != eps.size()) {
    throw std::invalid_argument("modified_error_step: length mismatch");
  }
  return e_mod + dt * (eps - alpha * e_mod);
}

}  // namespace nnid
