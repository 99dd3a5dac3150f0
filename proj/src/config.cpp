#include "nnid/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

namespace nnid {

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::Identify: return "identify";
    case Scenario::AlphaSweep: return "alpha_sweep";
    case Scenario::DeadZoneAblation: return "dead_zone_ablation";
    case Scenario::Compare: return "compare";
    case Scenario::FirstOrderDemo: return "first_order_demo";
  }
  return "?";
}

Scenario scenario_from_string(const std::string& name) {
  for (Scenario s : {Scenario::Identify, Scenario::AlphaSweep,
                     Scenario::DeadZoneAblation, Scenario::Compare,
                     Scenario::FirstOrderDemo}) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown scenario '" + name + "'");
}

namespace {

using KeyValues = std::map<std::string, std::string>;

const std::set<std::string>& schema() {
  static const std::set<std::string> keys{
      "scenario.kind",
      "plant.kind", "plant.dof", "plant.gravity", "plant.friction",
      "plant.masses", "plant.lengths", "plant.com_offsets", "plant.inertias",
      "reference.preset", "reference.amplitude_scale",
      "reference.frequency_scale",
      "network.hidden_m", "network.hidden_c", "network.hidden_g",
      "network.activation", "network.seed",
      "learner.alpha", "learner.gamma", "learner.nu0", "learner.nu0_percentile",
      "learner.rate_m_hidden", "learner.rate_m_output",
      "learner.rate_c_hidden", "learner.rate_c_output",
      "learner.rate_g_hidden", "learner.rate_g_output",
      "learner.lambda1", "learner.lambda2", "learner.lambda3",
      "learner.lambda0", "learner.dt", "learner.Gamma", "learner.robust",
      "learner.sigma", "learner.region_buffer",
      "kalman.jerk_density", "kalman.measurement_variance",
      "kalman.initial_variance",
      "controller.kind", "controller.kp", "controller.kd",
      "run.duration", "run.seed", "run.noise_std", "run.learn",
      "run.warm_start",
      "prefit.duration", "prefit.stride", "prefit.iterations",
      "sweep.alphas",
      "compare.rate_scale",
      "first_order.pole", "first_order.gain", "first_order.duration",
      "first_order.rate", "first_order.nu0", "first_order.alpha",
      "first_order.gamma",
      "output.dir", "output.plots", "output.grid_points",
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty() ||
      !std::isfinite(v)) {
    throw ConfigError(fmt::format("{}: '{}' is not a finite number", key, text));
  }
  return v;
}

std::uint64_t to_uint(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(
        fmt::format("{}: '{}' is not a non-negative integer", key, text));
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(fmt::format("{}: '{}' is not a boolean", key, text));
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(to_double(key, text.substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<double> per_joint(const std::string& key, const std::string& text,
                              std::size_t n) {
  auto v = to_list(key, text);
  if (v.size() == 1) v.assign(n, v.front());
  if (v.size() != n) {
    throw ConfigError(
        fmt::format("{}: expected 1 or {} values, got {}", key, n, v.size()));
  }
  return v;
}

Vec to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

class Reader {
 public:
  explicit Reader(const KeyValues& kv) : kv_(kv) {}

  const std::string* find(const std::string& key) const {
    const auto it = kv_.find(key);
    return it == kv_.end() ? nullptr : &it->second;
  }
  void number(const std::string& key, double& out) const {
    if (const auto* v = find(key)) out = to_double(key, *v);
  }
  template <class Int>
  void count(const std::string& key, Int& out) const {
    if (const auto* v = find(key)) out = static_cast<Int>(to_uint(key, *v));
  }
  void flag(const std::string& key, bool& out) const {
    if (const auto* v = find(key)) out = to_bool(key, *v);
  }
  void text(const std::string& key, std::string& out) const {
    if (const auto* v = find(key)) out = trim(*v);
  }

 private:
  const KeyValues& kv_;
};

ExperimentConfig build(const KeyValues& kv) {
  for (const auto& [key, value] : kv) {
    if (!schema().count(key)) throw ConfigError("unknown key '" + key + "'");
  }
  const Reader r(kv);
  ExperimentConfig cfg = default_config();

  if (const auto* v = r.find("scenario.kind")) {
    cfg.scenario = scenario_from_string(trim(*v));
  }

  // Plant first: everything per-joint depends on its dof.
  {
    std::string kind = "planar";
    r.text("plant.kind", kind);
    if (kind == "planar") {
      std::size_t dof = 2;
      r.count("plant.dof", dof);
      if (dof < 1 || dof > kMaxDof) {
        throw ConfigError(fmt::format("plant.dof must be in [1, {}]", kMaxDof));
      }
      cfg.plant = dof == 2 ? two_link_arm() : planar_arm(dof);
    } else if (kind == "anthropomorphic") {
      if (const auto* v = r.find("plant.dof"); v && to_uint("plant.dof", *v) != 3) {
        throw ConfigError("plant.dof must be 3 for the anthropomorphic arm");
      }
      cfg.plant = anthropomorphic_arm();
    } else {
      throw ConfigError("unknown plant.kind '" + kind + "'");
    }
    const std::size_t n = cfg.plant.dof;
    r.number("plant.gravity", cfg.plant.gravity);
    if (const auto* v = r.find("plant.friction")) {
      cfg.plant.friction = per_joint("plant.friction", *v, n);
    }
    if (const auto* v = r.find("plant.masses")) {
      cfg.plant.masses = per_joint("plant.masses", *v, n);
    }
    if (const auto* v = r.find("plant.lengths")) {
      cfg.plant.lengths = per_joint("plant.lengths", *v, n);
    }
    if (const auto* v = r.find("plant.com_offsets")) {
      cfg.plant.com_offsets = per_joint("plant.com_offsets", *v, n);
    }
    if (const auto* v = r.find("plant.inertias")) {
      cfg.plant.inertias = per_joint("plant.inertias", *v, n);
    }
    try {
      validate(cfg.plant);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  const std::size_t n = cfg.plant.dof;
  const auto ni = static_cast<Eigen::Index>(n);

  {
    std::string preset = "default";
    r.text("reference.preset", preset);
    if (preset != "default") {
      throw ConfigError("unknown reference.preset '" + preset + "'");
    }
    double amp = 1.0, freq = 1.0;
    r.number("reference.amplitude_scale", amp);
    r.number("reference.frequency_scale", freq);
    if (amp < 0.0 || freq <= 0.0) {
      throw ConfigError("reference scales: amplitude ≥ 0 and frequency > 0");
    }
    cfg.reference = default_excitation(n);
    for (auto& joint : cfg.reference) {
      for (auto& c : joint.components) {
        c.amplitude *= amp;
        c.omega *= freq;
      }
    }
  }

  cfg.network.dof = n;
  r.count("network.hidden_m", cfg.network.hidden_m);
  r.count("network.hidden_c", cfg.network.hidden_c);
  r.count("network.hidden_g", cfg.network.hidden_g);
  if (const auto* v = r.find("network.activation")) {
    try {
      cfg.network.activation = activation_from_string(trim(*v));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (const auto* v = r.find("network.seed")) {
    cfg.network_seed = to_uint("network.seed", *v);
  }

  auto& hp = cfg.hp;
  r.number("learner.alpha", hp.alpha);
  r.number("learner.gamma", hp.gamma);
  if (const auto* v = r.find("learner.nu0")) {
    if (trim(*v) == "auto") {
      cfg.nu0_auto = true;
    } else {
      cfg.nu0_auto = false;
      hp.nu0 = to_double("learner.nu0", *v);
    }
  }
  r.number("learner.nu0_percentile", cfg.nu0_percentile);
  r.number("learner.rate_m_hidden", hp.rates.m_hidden);
  r.number("learner.rate_m_output", hp.rates.m_output);
  r.number("learner.rate_c_hidden", hp.rates.c_hidden);
  r.number("learner.rate_c_output", hp.rates.c_output);
  r.number("learner.rate_g_hidden", hp.rates.g_hidden);
  r.number("learner.rate_g_output", hp.rates.g_output);
  r.number("learner.lambda1", hp.lw.lambda1);
  r.number("learner.lambda2", hp.lw.lambda2);
  r.number("learner.lambda3", hp.lw.lambda3);
  r.number("learner.lambda0", hp.lambda0);
  r.number("learner.dt", hp.dt);
  r.number("learner.Gamma", hp.Gamma);
  if (const auto* v = r.find("learner.robust")) {
    hp.robust = robust_mode_from_string(trim(*v));
  }
  r.number("learner.sigma", hp.sigma);
  r.number("learner.region_buffer", hp.region_buffer);

  auto& loop = cfg.loop;
  r.number("kalman.jerk_density", loop.kalman.jerk_density);
  r.number("kalman.measurement_variance", loop.kalman.measurement_variance);
  r.number("kalman.initial_variance", loop.kalman.initial_variance);

  if (const auto* v = r.find("controller.kind")) {
    loop.controller = controller_kind_from_string(trim(*v));
  }
  loop.gains.kp = Vec::Constant(ni, 60.0);
  loop.gains.kd = Vec::Constant(ni, 1.5);
  if (const auto* v = r.find("controller.kp")) {
    loop.gains.kp = to_vec(per_joint("controller.kp", *v, n));
  }
  if (const auto* v = r.find("controller.kd")) {
    loop.gains.kd = to_vec(per_joint("controller.kd", *v, n));
  }

  r.number("run.duration", loop.duration);
  if (const auto* v = r.find("run.seed")) loop.seed = to_uint("run.seed", *v);
  r.number("run.noise_std", loop.noise_std);
  r.flag("run.learn", loop.learn);
  loop.reference = cfg.reference;
  r.text("run.warm_start", cfg.warm_start);

  r.number("prefit.duration", cfg.prefit.duration);
  r.count("prefit.stride", cfg.prefit.stride);
  r.count("prefit.iterations", cfg.prefit.lm.max_iterations);

  if (const auto* v = r.find("sweep.alphas")) {
    cfg.sweep_alphas = to_list("sweep.alphas", *v);
  }
  r.number("compare.rate_scale", cfg.compare_rate_scale);

  auto& fo = cfg.first_order;
  r.number("first_order.pole", fo.pole);
  r.number("first_order.gain", fo.gain);
  r.number("first_order.duration", fo.duration);
  r.number("first_order.rate", fo.rate);
  r.number("first_order.nu0", fo.nu0);
  r.number("first_order.alpha", fo.alpha);
  r.number("first_order.gamma", fo.gamma);

  r.text("output.dir", cfg.output_dir);
  r.flag("output.plots", cfg.plots);
  r.count("output.grid_points", cfg.grid_points);

  check_config(cfg);
  return cfg;
}

KeyValues read_key_values(std::istream& is) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  KeyValues kv;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw ConfigError("config: key '" + section + "' outside a section");
    }
    for (const auto& [key, value] : body) {
      kv[section + "." + key] = value.data();
    }
  }
  return kv;
}

}  // namespace

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.loop.reference = cfg.reference;
  cfg.loop.controller = ControllerKind::Pd;
  cfg.loop.gains.kp = Vec::Constant(2, 60.0);
  cfg.loop.gains.kd = Vec::Constant(2, 1.5);
  return cfg;
}

ExperimentConfig parse_config(std::istream& is) {
  return build(read_key_values(is));
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_config(in);
}

void apply_override(ExperimentConfig& cfg, const std::string& dotted_key,
                    const std::string& value) {
  if (!schema().count(dotted_key)) {
    throw ConfigError("unknown key '" + dotted_key + "'");
  }
  const Reader r(KeyValues{{dotted_key, value}});
  auto& hp = cfg.hp;
  if (dotted_key == "learner.alpha") r.number(dotted_key, hp.alpha);
  else if (dotted_key == "learner.gamma") r.number(dotted_key, hp.gamma);
  else if (dotted_key == "learner.nu0") {
    if (trim(value) == "auto") {
      cfg.nu0_auto = true;
    } else {
      cfg.nu0_auto = false;
      r.number(dotted_key, hp.nu0);
    }
  } else if (dotted_key == "learner.Gamma") r.number(dotted_key, hp.Gamma);
  else if (dotted_key == "learner.dt") r.number(dotted_key, hp.dt);
  else if (dotted_key == "learner.sigma") r.number(dotted_key, hp.sigma);
  else if (dotted_key == "run.duration") r.number(dotted_key, cfg.loop.duration);
  else if (dotted_key == "run.noise_std") r.number(dotted_key, cfg.loop.noise_std);
  else if (dotted_key == "run.seed") cfg.loop.seed = to_uint(dotted_key, value);
  else if (dotted_key == "network.seed") cfg.network_seed = to_uint(dotted_key, value);
  else if (dotted_key == "output.dir") r.text(dotted_key, cfg.output_dir);
  else if (dotted_key == "output.plots") r.flag(dotted_key, cfg.plots);
  else {
    throw ConfigError("key '" + dotted_key + "' cannot be overridden");
  }
  check_config(cfg);
}

void check_config(const ExperimentConfig& cfg) {
  const auto n = static_cast<Eigen::Index>(cfg.plant.dof);
  if (cfg.scenario != Scenario::AlphaSweep) {
    if (const auto why = validate_hyperparams(cfg.hp)) throw ConfigError(*why);
  } else {
    // α itself is swept; only the rules that do not involve α are checked
    // on the base config.
    HyperParams probe = cfg.hp;
    probe.alpha = std::max(cfg.hp.gamma, 1.0);
    if (const auto why = validate_hyperparams(probe, {false})) throw ConfigError(*why);
    if (cfg.sweep_alphas.empty()) throw ConfigError("sweep.alphas is empty");
    for (double a : cfg.sweep_alphas) {
      HyperParams h = cfg.hp;
      h.alpha = a;
      if (const auto why = validate_hyperparams(h, {false})) {
        throw ConfigError(fmt::format("sweep alpha {}: {}", a, *why));
      }
    }
  }
  if (cfg.network.hidden_m == 0 || cfg.network.hidden_c == 0 ||
      cfg.network.hidden_g == 0) {
    throw ConfigError("network hidden sizes must be positive");
  }
  if (!(cfg.nu0_percentile > 0.0 && cfg.nu0_percentile <= 1.0)) {
    throw ConfigError("learner.nu0_percentile must be in (0, 1]");
  }
  if (cfg.loop.gains.kp.size() != n || cfg.loop.gains.kd.size() != n ||
      (cfg.loop.gains.kp.array() <= 0.0).any() ||
      (cfg.loop.gains.kd.array() <= 0.0).any()) {
    throw ConfigError("controller gains must be positive, one per joint");
  }
  if (!(cfg.loop.duration > 0.0)) throw ConfigError("run.duration must be positive");
  if (cfg.loop.noise_std < 0.0) throw ConfigError("run.noise_std must be ≥ 0");
  const auto& k = cfg.loop.kalman;
  if (!(k.jerk_density > 0.0) || !(k.measurement_variance > 0.0) ||
      !(k.initial_variance > 0.0)) {
    throw ConfigError("kalman tuning values must be positive");
  }
  if (!(cfg.prefit.duration > 0.0) || cfg.prefit.stride == 0) {
    throw ConfigError("prefit duration and stride must be positive");
  }
  if (!(cfg.compare_rate_scale >= 0.0)) {
    throw ConfigError("compare.rate_scale must be ≥ 0");
  }
  const auto& fo = cfg.first_order;
  if (!(fo.pole > 0.0) || fo.gain == 0.0 || !(fo.duration > 0.0) ||
      !(fo.rate > 0.0) || fo.nu0 < 0.0 || !(fo.alpha > 0.0) ||
      !(fo.alpha * cfg.hp.dt < 2.0) || !(fo.gamma > 1.0) ||
      fo.gamma > fo.alpha) {
    throw ConfigError(
        "first_order: need pole > 0, gain ≠ 0, rate > 0, nu0 ≥ 0, "
        "1 < gamma ≤ alpha, alpha·dt < 2");
  }
  if (cfg.grid_points < 2) throw ConfigError("output.grid_points must be ≥ 2");
  if (cfg.output_dir.empty()) throw ConfigError("output.dir is empty");
}

}  // namespace nnid
