#include "nnid/network.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

namespace nnid {

std::string to_string(Activation a) {
  return a == Activation::Tanh ? "tanh" : "linear";
}

Activation activation_from_string(const std::string& name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "linear") return Activation::Linear;
  throw ConfigError("unknown activation '" + name + "'");
}

double activate(Activation a, double x) {
  return a == Activation::Tanh ? std::tanh(x) : x;
}

double activation_slope(Activation a, double x) {
  if (a == Activation::Linear) return 1.0;
  const double t = std::tanh(x);
  return 1.0 - t * t;
}

double activation_curvature(Activation a, double x) {
  if (a == Activation::Linear) return 0.0;
  const double t = std::tanh(x);
  return -2.0 * t * (1.0 - t * t);
}

const char* term_name(Term t) {
  switch (t) {
    case Term::M: return "M";
    case Term::C: return "C";
    case Term::G: return "G";
  }
  return "?";
}

SubnetPass subnet_pass(const SubnetWeights& w, Activation act, const Vec& x) {
  if (x.size() != w.input_dim()) {
    throw std::invalid_argument(
        fmt::format("subnet_forward: input has {} entries, expected {}",
                    x.size(), w.input_dim()));
  }
  if (w.output.cols() != w.hidden_units() + 1) {
    throw std::invalid_argument("subnet_forward: output layer shape mismatch");
  }
  const Eigen::Index p = w.hidden_units();
  SubnetPass pass;
  pass.input.resize(x.size() + 1);
  pass.input << x, 1.0;
  pass.preact = w.hidden * pass.input;
  pass.hidden.resize(p + 1);
  pass.slope.resize(p);
  pass.curvature.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    pass.hidden(j) = activate(act, pass.preact(j));
    pass.slope(j) = activation_slope(act, pass.preact(j));
    pass.curvature(j) = activation_curvature(act, pass.preact(j));
  }
  pass.hidden(p) = 1.0;
  pass.output = w.output * pass.hidden;
  return pass;
}

Vec subnet_forward(const SubnetWeights& w, Activation act, const Vec& x) {
  return subnet_pass(w, act, x).output;
}

Mat output_weight_jacobian(const SubnetPass& pass) {
  const Eigen::Index d_out = pass.output.size();
  const Eigen::Index width = pass.hidden.size();
  Mat J = Mat::Zero(d_out, d_out * width);
  for (Eigen::Index r = 0; r < d_out; ++r) {
    J.block(r, r * width, 1, width) = pass.hidden.transpose();
  }
  return J;
}

Mat hidden_weight_jacobian(const SubnetWeights& w, const SubnetPass& pass) {
  const Eigen::Index d_out = w.output_dim();
  const Eigen::Index p = w.hidden_units();
  const Eigen::Index width = pass.input.size();
  Mat J(d_out, p * width);
  for (Eigen::Index j = 0; j < p; ++j) {
    // column block j: W_o(:, j) · F'(a_j) · x̃ᵀ
    J.block(0, j * width, d_out, width) =
        (w.output.col(j) * pass.slope(j)) * pass.input.transpose();
  }
  return J;
}

Mat input_jacobian(const SubnetWeights& w, const SubnetPass& pass) {
  const Eigen::Index p = w.hidden_units();
  const Eigen::Index d_in = w.input_dim();
  return w.output.leftCols(p) * pass.slope.asDiagonal() *
         w.hidden.leftCols(d_in);
}

Eigen::Index NetworkBundle::parameter_count() const {
  Eigen::Index n = 0;
  for (const auto& s : subnets) n += s.hidden.size() + s.output.size();
  return n;
}

void validate(const NetworkBundle& nets) {
  const auto n = static_cast<Eigen::Index>(nets.dof);
  if (n < 1) throw std::invalid_argument("network: dof must be >= 1");
  const std::array<Eigen::Index, 3> d_in{n, 2 * n, n};
  const std::array<Eigen::Index, 3> d_out{n * n, n * n, n};
  for (Term t : kTerms) {
    const auto& s = nets.subnet(t);
    const auto i = static_cast<std::size_t>(t);
    if (s.input_dim() != d_in[i] || s.output_dim() != d_out[i] ||
        s.output.cols() != s.hidden_units() + 1 || s.hidden_units() < 1) {
      throw std::invalid_argument(fmt::format(
          "network: {}-subnet shape inconsistent with dof {}", term_name(t),
          nets.dof));
    }
    if (!all_finite(s.hidden) || !all_finite(s.output)) {
      throw std::invalid_argument(
          fmt::format("network: {}-subnet has non-finite weights",
                      term_name(t)));
    }
  }
}

NetworkBundle make_network(const NetworkShape& shape, std::uint64_t seed,
                           double inertia_level, const Vec& q0) {
  const auto n = static_cast<Eigen::Index>(shape.dof);
  require_size(q0, n, "make_network q0");
  std::mt19937_64 rng(seed);

  const auto layer = [&](Eigen::Index rows, Eigen::Index fan_in) {
    const double bound = 0.1 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Mat m(rows, fan_in + 1);
    // Fill row-major so the draw order matches the flattening contract.
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = dist(rng);
    }
    return m;
  };
  const auto subnet = [&](Eigen::Index d_in, Eigen::Index p,
                          Eigen::Index d_out) {
    SubnetWeights w;
    w.hidden = layer(p, d_in);
    w.output = layer(d_out, p);
    return w;
  };

  NetworkBundle nets;
  nets.dof = shape.dof;
  nets.activation = shape.activation;
  nets.subnet(Term::M) = subnet(n, shape.hidden_m, n * n);
  nets.subnet(Term::C) = subnet(2 * n, shape.hidden_c, n * n);
  nets.subnet(Term::G) = subnet(n, shape.hidden_g, n);

  auto& m = nets.subnet(Term::M);
  const Vec y0 = subnet_forward(m, nets.activation, q0);
  const Mat target = inertia_level * Mat::Identity(n, n);
  const Vec target_flat = flatten(target);
  m.output.col(m.output.cols() - 1) += target_flat - y0;
  return nets;
}

Vec flatten(const Mat& m) {
  Vec v(m.size());
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) v(k++) = m(r, c);
  }
  return v;
}

Mat unflatten(const Vec& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols) {
    throw std::invalid_argument("unflatten: size mismatch");
  }
  Mat m(rows, cols);
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = v(k++);
  }
  return m;
}

Vec parameter_vector(const NetworkBundle& nets) {
  Vec theta(nets.parameter_count());
  Eigen::Index k = 0;
  for (const auto& s : nets.subnets) {
    theta.segment(k, s.hidden.size()) = flatten(s.hidden);
    k += s.hidden.size();
    theta.segment(k, s.output.size()) = flatten(s.output);
    k += s.output.size();
  }
  return theta;
}

void set_parameter_vector(NetworkBundle& nets, const Vec& theta) {
  if (theta.size() != nets.parameter_count()) {
    throw std::invalid_argument("set_parameter_vector: size mismatch");
  }
  Eigen::Index k = 0;
  for (auto& s : nets.subnets) {
    s.hidden = unflatten(theta.segment(k, s.hidden.size()), s.hidden.rows(),
                         s.hidden.cols());
    k += s.hidden.size();
    s.output = unflatten(theta.segment(k, s.output.size()), s.output.rows(),
                         s.output.cols());
    k += s.output.size();
  }
}

namespace {

Vec stacked_state(const Vec& q, const Vec& qdot) {
  Vec x(q.size() + qdot.size());
  x << q, qdot;
  return x;
}

}  // namespace

TermsEstimate assemble_terms(const NetworkBundle& nets, const Vec& q,
                             const Vec& qdot) {
  const auto n = static_cast<Eigen::Index>(nets.dof);
  require_size(q, n, "assemble_terms q");
  require_size(qdot, n, "assemble_terms qdot");
  TermsEstimate est;
  est.M_hat = unflatten(subnet_forward(nets.subnet(Term::M), nets.activation, q),
                        n, n);
  est.C_hat = unflatten(subnet_forward(nets.subnet(Term::C), nets.activation,
                                       stacked_state(q, qdot)),
                        n, n);
  est.G_hat = subnet_forward(nets.subnet(Term::G), nets.activation, q);
  est.q = q;
  est.qdot = qdot;
  return est;
}

Vec predicted_torque(const NetworkBundle& nets, const Vec& q, const Vec& qdot,
                     const Vec& qddot) {
  require_size(qddot, static_cast<Eigen::Index>(nets.dof),
               "predicted_torque qddot");
  const TermsEstimate est = assemble_terms(nets, q, qdot);
  return est.M_hat * qddot + est.C_hat * qdot + est.G_hat;
}

Mat torque_output_map(Term t, const Vec& qdot, const Vec& qddot) {
  const Eigen::Index n = qdot.size();
  if (t == Term::G) return Mat::Identity(n, n);
  const Vec& v = (t == Term::M) ? qddot : qdot;
  // τ̂_r = Σ_c Y(r, c) v_c with Y reshaped row-major from the subnet output.
  Mat A = Mat::Zero(n, n * n);
  for (Eigen::Index r = 0; r < n; ++r) {
    A.block(r, r * n, 1, n) = v.transpose();
  }
  return A;
}

RegressorJacobians regressor_jacobians(const NetworkBundle& nets, const Vec& q,
                                       const Vec& qdot, const Vec& qddot) {
  const auto n = static_cast<Eigen::Index>(nets.dof);
  require_size(q, n, "regressor_jacobians q");
  require_size(qdot, n, "regressor_jacobians qdot");
  require_size(qddot, n, "regressor_jacobians qddot");
  RegressorJacobians jac;
  for (Term t : kTerms) {
    const auto& w = nets.subnet(t);
    const Vec x = (t == Term::C) ? stacked_state(q, qdot) : q;
    const SubnetPass pass = subnet_pass(w, nets.activation, x);
    const Mat A = torque_output_map(t, qdot, qddot);
    const auto i = static_cast<std::size_t>(t);
    jac.zeta[i] = A * output_weight_jacobian(pass);
    jac.xi[i] = A * hidden_weight_jacobian(w, pass);
  }
  return jac;
}

Mat mhat_rate(const NetworkBundle& nets, const Vec& q, const Vec& qdot) {
  const auto n = static_cast<Eigen::Index>(nets.dof);
  require_size(qdot, n, "mhat_rate qdot");
  const auto& w = nets.subnet(Term::M);
  const SubnetPass pass = subnet_pass(w, nets.activation, q);
  return unflatten(input_jacobian(w, pass) * qdot, n, n);
}

RateJacobian mhat_rate_jacobian(const NetworkBundle& nets, const Vec& q,
                                const Vec& qdot) {
  const auto n = static_cast<Eigen::Index>(nets.dof);
  require_size(qdot, n, "mhat_rate_jacobian qdot");
  const auto& w = nets.subnet(Term::M);
  const SubnetPass pass = subnet_pass(w, nets.activation, q);
  const Eigen::Index p = w.hidden_units();
  const Eigen::Index width = pass.input.size();

  // rate = W_o[:, :P] · s,  s_j = F'(a_j) u_j,  u = W_h[:, :N] q̇
  const Vec u = w.hidden.leftCols(n) * qdot;
  const Vec s = pass.slope.cwiseProduct(u);

  RateJacobian out;
  out.rate = w.output.leftCols(p) * s;
  out.output = Mat::Zero(n * n, n * n * (p + 1));
  for (Eigen::Index r = 0; r < n * n; ++r) {
    out.output.block(r, r * (p + 1), 1, p) = s.transpose();
  }
  Vec qdot_aug = Vec::Zero(width);
  qdot_aug.head(n) = qdot;
  out.hidden.resize(n * n, p * width);
  for (Eigen::Index j = 0; j < p; ++j) {
    const Vec ds = pass.curvature(j) * u(j) * pass.input +
                   pass.slope(j) * qdot_aug;
    out.hidden.block(0, j * width, n * n, width) =
        w.output.col(j) * ds.transpose();
  }
  return out;
}

// -----------------------------------------------------------------------------
// Snapshots
// -----------------------------------------------------------------------------

namespace {

void write_matrix(std::ostream& os, const std::string& name, const Mat& m) {
  os << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) os << ',';
      os << fmt::format("{:.17g}", m(r, c));
    }
    os << '\n';
  }
}

Mat read_matrix(std::istream& is, const std::string& expected) {
  std::string line;
  if (!std::getline(is, line)) {
    throw std::runtime_error("weights: missing block " + expected);
  }
  std::istringstream header(line);
  std::string name;
  Eigen::Index rows = 0, cols = 0;
  header >> name >> rows >> cols;
  if (name != expected || rows <= 0 || cols <= 0) {
    throw std::runtime_error("weights: bad header '" + line + "', expected " +
                             expected);
  }
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (!std::getline(is, line)) {
      throw std::runtime_error("weights: truncated block " + expected);
    }
    std::istringstream row(line);
    std::string cell;
    Eigen::Index c = 0;
    while (std::getline(row, cell, ',')) {
      if (c >= cols) throw std::runtime_error("weights: too many columns");
      m(r, c++) = std::stod(cell);
    }
    if (c != cols) throw std::runtime_error("weights: too few columns");
  }
  return m;
}

}  // namespace

void write_weights(std::ostream& os, const NetworkBundle& nets) {
  os << "nnid-weights 1\n";
  os << "dof " << nets.dof << '\n';
  os << "activation " << to_string(nets.activation) << '\n';
  for (Term t : kTerms) {
    write_matrix(os, std::string(term_name(t)) + ".hidden",
                 nets.subnet(t).hidden);
    write_matrix(os, std::string(term_name(t)) + ".output",
                 nets.subnet(t).output);
  }
}

NetworkBundle read_weights(std::istream& is) {
  std::string magic, key, act;
  int version = 0;
  NetworkBundle nets;
  is >> magic >> version;
  if (magic != "nnid-weights" || version != 1) {
    throw std::runtime_error("weights: unrecognised header");
  }
  is >> key >> nets.dof;
  if (key != "dof") throw std::runtime_error("weights: expected dof");
  is >> key >> act;
  if (key != "activation") throw std::runtime_error("weights: expected activation");
  nets.activation = activation_from_string(act);
  is.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
  for (Term t : kTerms) {
    nets.subnet(t).hidden = read_matrix(is, std::string(term_name(t)) + ".hidden");
    nets.subnet(t).output = read_matrix(is, std::string(term_name(t)) + ".output");
  }
  validate(nets);
  return nets;
}

void save_weights(const std::string& path, const NetworkBundle& nets) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_weights(os, nets);
}

NetworkBundle load_weights(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  return read_weights(is);
}

}  // namespace nnid
