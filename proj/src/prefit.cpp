#include "nnid/prefit.hpp"

#include <algorithm>
#include <cmath>

namespace nnid {

Vec levenberg_marquardt(const Vec& theta0, const ResidualFn& fn,
                        const LmOptions& opts, LmReport* report) {
  Vec theta = theta0;
  Vec r;
  Mat J;
  fn(theta, r, J);
  double cost = 0.5 * r.squaredNorm();
  LmReport rep;
  rep.initial_cost = cost;

  double mu = opts.initial_damping;
  Vec r_try;
  Mat J_try;
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    const Mat H = J.transpose() * J;
    const Vec g = J.transpose() * r;
    bool accepted = false;
    for (int attempt = 0; attempt < 12 && !accepted; ++attempt) {
      Mat A = H;
      A.diagonal() += mu * (H.diagonal().array() + 1e-9).matrix();
      const Vec step = A.ldlt().solve(-g);
      const Vec candidate = theta + step;
      fn(candidate, r_try, J_try);
      const double c = 0.5 * r_try.squaredNorm();
      if (std::isfinite(c) && c < cost) {
        const double rel = (cost - c) / std::max(cost, 1e-300);
        theta = candidate;
        r.swap(r_try);
        J.swap(J_try);
        cost = c;
        mu = std::max(mu / 3.0, 1e-12);
        accepted = true;
        ++rep.iterations;
        if (rel < opts.tolerance) it = opts.max_iterations;
      } else {
        mu *= 4.0;
      }
    }
    if (!accepted) break;
  }
  rep.final_cost = cost;
  if (report) *report = rep;
  return theta;
}

Mat residual_jacobian_full(const ResidualJacobian& jac) {
  Eigen::Index cols = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    cols += jac.hidden[i].cols() + jac.output[i].cols();
  }
  const Eigen::Index rows = jac.hidden[0].rows();
  Mat J(rows, cols);
  Eigen::Index k = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    J.middleCols(k, jac.hidden[i].cols()) = jac.hidden[i];
    k += jac.hidden[i].cols();
    J.middleCols(k, jac.output[i].cols()) = jac.output[i];
    k += jac.output[i].cols();
  }
  return J;
}

NetworkBundle batch_prefit(const NetworkBundle& init,
                           const std::vector<MotionSample>& data,
                           const ResidualSettings& settings,
                           std::size_t stride, const LmOptions& opts,
                           LmReport* report) {
  std::vector<const MotionSample*> used;
  for (std::size_t i = 0; i < data.size(); i += std::max<std::size_t>(stride, 1)) {
    if (data[i].t > 0.0) used.push_back(&data[i]);
  }
  if (used.empty()) throw std::invalid_argument("batch_prefit: no samples");

  const auto n = static_cast<Eigen::Index>(init.dof);
  const Eigen::Index L = wae_length(n);
  const Eigen::Index P = init.parameter_count();
  const auto rows = static_cast<Eigen::Index>(used.size()) * L;

  NetworkBundle work = init;
  const ResidualFn fn = [&](const Vec& theta, Vec& r, Mat& J) {
    set_parameter_vector(work, theta);
    r.resize(rows);
    J.resize(rows, P);
    for (std::size_t s = 0; s < used.size(); ++s) {
      const Residual res = evaluate_residual(work, *used[s], settings, true);
      const auto row = static_cast<Eigen::Index>(s) * L;
      r.segment(row, L) = res.errors.eps;
      J.middleRows(row, L) = residual_jacobian_full(res.jacobian);
    }
  };
  const Vec theta = levenberg_marquardt(parameter_vector(init), fn, opts, report);
  NetworkBundle out = init;
  set_parameter_vector(out, theta);
  return out;
}

NetworkBundle fit_to_ground_truth(const NetworkBundle& init,
                                  const PlantModel& plant,
                                  const std::vector<PlantState>& points,
                                  const LmOptions& opts, LmReport* report) {
  if (points.empty()) {
    throw std::invalid_argument("fit_to_ground_truth: no points");
  }
  const auto n = static_cast<Eigen::Index>(init.dof);
  const Eigen::Index per_point = 2 * n * n + n;
  const Eigen::Index P = init.parameter_count();
  const auto rows = static_cast<Eigen::Index>(points.size()) * per_point;

  std::vector<DynamicsTerms> truth;
  truth.reserve(points.size());
  for (const auto& p : points) {
    truth.push_back(ground_truth_terms(plant, p.q, p.qdot));
  }

  // Column offsets of each subnet block in parameter_vector order.
  std::array<Eigen::Index, 3> offset{};
  Eigen::Index acc = 0;
  for (Term t : kTerms) {
    offset[static_cast<std::size_t>(t)] = acc;
    acc += init.subnet(t).hidden.size() + init.subnet(t).output.size();
  }

  NetworkBundle work = init;
  const ResidualFn fn = [&](const Vec& theta, Vec& r, Mat& J) {
    set_parameter_vector(work, theta);
    r.resize(rows);
    J.setZero(rows, P);
    for (std::size_t s = 0; s < points.size(); ++s) {
      const auto& p = points[s];
      Vec xc(2 * n);
      xc << p.q, p.qdot;
      const std::array<Vec, 3> inputs{p.q, xc, p.q};
      const std::array<Vec, 3> targets{flatten(truth[s].M),
                                       flatten(truth[s].C), truth[s].G};
      Eigen::Index row = static_cast<Eigen::Index>(s) * per_point;
      for (Term t : kTerms) {
        const auto i = static_cast<std::size_t>(t);
        const auto& w = work.subnet(t);
        const SubnetPass pass = subnet_pass(w, work.activation, inputs[i]);
        const Eigen::Index m = pass.output.size();
        r.segment(row, m) = pass.output - targets[i];
        J.block(row, offset[i], m, w.hidden.size()) =
            hidden_weight_jacobian(w, pass);
        J.block(row, offset[i] + w.hidden.size(), m, w.output.size()) =
            output_weight_jacobian(pass);
        row += m;
      }
    }
  };
  const Vec theta = levenberg_marquardt(parameter_vector(init), fn, opts, report);
  NetworkBundle out = init;
  set_parameter_vector(out, theta);
  return out;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile: empty sample");
  p = std::clamp(p, 0.0, 1.0);
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(
      std::ceil(p * static_cast<double>(values.size())));
  return values[std::max<std::size_t>(rank, 1) - 1];
}

double calibrate_nu0(const RunLog& frozen_run, double p) {
  std::vector<double> norms;
  norms.reserve(frozen_run.steps.size());
  for (const auto& s : frozen_run.steps) norms.push_back(s.eps_norm);
  return percentile(std::move(norms), p);
}

}  // namespace nnid
