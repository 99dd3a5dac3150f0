#include "nnid/experiments.hpp"

#include "nnid/svg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace nnid {

namespace fs = std::filesystem;

InertiaBand plant_band(const ExperimentConfig& cfg) {
  return inertia_band(cfg.plant);
}

NetworkBundle initial_network(const ExperimentConfig& cfg) {
  NetworkShape shape = cfg.network;
  shape.dof = cfg.plant.dof;
  return make_network(shape, cfg.network_seed, plant_band(cfg).upper / 2.0,
                      excitation_reference(0.0, cfg.reference).q);
}

namespace {

LoopConfig loop_config(const ExperimentConfig& cfg) {
  LoopConfig lc = cfg.loop;
  lc.reference = cfg.reference;
  lc.band = plant_band(cfg);
  return lc;
}

ResidualSettings residual_settings(const ExperimentConfig& cfg) {
  return {cfg.hp.lw, cfg.hp.lambda0, plant_band(cfg)};
}

NetworkBundle starting_network(const ExperimentConfig& cfg,
                               const std::optional<Nu0Calibration>& cal) {
  if (cfg.warm_start == "none") return initial_network(cfg);
  if (cfg.warm_start == "prefit") return cal.value().prefit;
  NetworkBundle nets = load_weights(cfg.warm_start);
  if (nets.dof != cfg.plant.dof) {
    throw ConfigError("warm start weights do not match the plant dof");
  }
  return nets;
}

bool needs_calibration(const ExperimentConfig& cfg) {
  return cfg.nu0_auto || cfg.warm_start == "prefit";
}

/// Runs the loop into `log`, converting a divergence into a Failure.
std::optional<Failure> run_into(const ExperimentConfig& cfg,
                                const NetworkBundle& nets,
                                const HyperParams& hp, const LoopConfig& lc,
                                RunLog& log) {
  try {
    run_identification_loop(cfg.plant, nets, hp, lc, log);
  } catch (const DivergenceError& e) {
    return Failure{e.what(), e.step()};
  }
  return std::nullopt;
}

}  // namespace

Nu0Calibration calibrate_noise_bound(const ExperimentConfig& cfg) {
  LoopConfig lc = loop_config(cfg);
  lc.duration = cfg.prefit.duration;
  lc.learn = false;
  if (lc.controller == ControllerKind::Nnidc) lc.controller = ControllerKind::Pd;

  const NetworkBundle nets0 = initial_network(cfg);
  const RunLog logged = run_identification_loop(cfg.plant, nets0, cfg.hp, lc);

  Nu0Calibration cal;
  cal.prefit = batch_prefit(nets0, regressor_samples(logged),
                            residual_settings(cfg), cfg.prefit.stride,
                            cfg.prefit.lm, &cal.lm);
  const RunLog replay = run_identification_loop(cfg.plant, cal.prefit, cfg.hp, lc);
  cal.nu0 = calibrate_nu0(replay, cfg.nu0_percentile);
  cal.samples = replay.steps.size();
  return cal;
}

RecoveryReport term_recovery(const PlantModel& plant,
                             const NetworkBundle& before,
                             const NetworkBundle& after, const RunLog& run,
                             std::size_t points_per_joint) {
  RecoveryReport rep;
  if (run.steps.empty()) return rep;
  const auto n = static_cast<Eigen::Index>(plant.dof);
  Vec qlo = run.steps.front().q, qhi = qlo;
  Vec vlo = run.steps.front().qdot, vhi = vlo;
  for (const auto& s : run.steps) {
    qlo = qlo.cwiseMin(s.q);
    qhi = qhi.cwiseMax(s.q);
    vlo = vlo.cwiseMin(s.qdot);
    vhi = vhi.cwiseMax(s.qdot);
  }
  // Keep the tensor grid below ~2·10⁴ points for higher-dof arms.
  std::size_t per = std::max<std::size_t>(points_per_joint, 2);
  while (per > 2 && std::pow(static_cast<double>(per), static_cast<double>(n)) > 2e4) {
    --per;
  }
  std::size_t total = 1;
  for (Eigen::Index j = 0; j < n; ++j) total *= per;

  // Velocities follow an additive-recurrence sequence so every grid point
  // gets a distinct, deterministic q̇ inside the visited box.
  const double golden = 0.6180339887498949;
  Vec q(n), qd(n);
  for (std::size_t k = 0; k < total; ++k) {
    std::size_t rem = k;
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto i = static_cast<double>(rem % per);
      rem /= per;
      q(j) = qlo(j) + (qhi(j) - qlo(j)) * i / static_cast<double>(per - 1);
      const double u = std::fmod(static_cast<double>(k + 1) *
                                     (golden + 0.1 * static_cast<double>(j)),
                                 1.0);
      qd(j) = vlo(j) + (vhi(j) - vlo(j)) * u;
    }
    const DynamicsTerms truth = ground_truth_terms(plant, q, qd);
    const TermsEstimate a = assemble_terms(before, q, qd);
    const TermsEstimate b = assemble_terms(after, q, qd);
    rep.M_initial += (a.M_hat - truth.M).norm();
    rep.M_final += (b.M_hat - truth.M).norm();
    rep.C_initial += (a.C_hat - truth.C).norm();
    rep.C_final += (b.C_hat - truth.C).norm();
    rep.G_initial += (a.G_hat - truth.G).norm();
    rep.G_final += (b.G_hat - truth.G).norm();
  }
  const auto cnt = static_cast<double>(total);
  rep.points = total;
  for (double* v : {&rep.M_initial, &rep.M_final, &rep.C_initial, &rep.C_final,
                    &rep.G_initial, &rep.G_final}) {
    *v /= cnt;
  }
  return rep;
}

IdentifyResult identify(const ExperimentConfig& cfg) {
  IdentifyResult r;
  HyperParams hp = cfg.hp;
  std::optional<Nu0Calibration> cal;
  try {
    if (needs_calibration(cfg)) cal = calibrate_noise_bound(cfg);
  } catch (const DivergenceError& e) {
    r.failure = Failure{std::string("calibration: ") + e.what(), e.step()};
    return r;
  }
  if (cfg.nu0_auto) hp.nu0 = cal->nu0;
  r.nu0 = hp.nu0;
  r.initial = starting_network(cfg, cal);

  LoopConfig lc = loop_config(cfg);
  RunLog first;
  if (auto f = run_into(cfg, r.initial, hp, lc, first)) {
    r.failure = f;
    r.log = std::move(first);
    return r;
  }
  lc.theta_ref = parameter_vector(first.final_nets);
  r.failure = run_into(cfg, r.initial, hp, lc, r.log);
  r.recovery = term_recovery(cfg.plant, r.initial, r.log.final_nets, r.log,
                             cfg.grid_points);
  return r;
}

SummaryReport summarize_log(const RunLog& log) {
  std::stringstream ss;
  write_run_csv(ss, log);
  return summarize(read_csv(ss));
}

namespace {

CsvTable table_of(const RunLog& log) {
  std::stringstream ss;
  write_run_csv(ss, log);
  return read_csv(ss);
}

double nu0_for(const ExperimentConfig& cfg, std::optional<Nu0Calibration>& cal) {
  if (needs_calibration(cfg)) cal = calibrate_noise_bound(cfg);
  return cfg.nu0_auto ? cal->nu0 : cfg.hp.nu0;
}

}  // namespace

SweepResult alpha_sweep(const ExperimentConfig& cfg) {
  SweepResult res;
  std::optional<Nu0Calibration> cal;
  res.nu0 = nu0_for(cfg, cal);
  const NetworkBundle nets = starting_network(cfg, cal);
  const LoopConfig lc = loop_config(cfg);

  std::vector<double> alphas = cfg.sweep_alphas;
  std::sort(alphas.begin(), alphas.end());
  for (double a : alphas) {
    HyperParams hp = cfg.hp;
    hp.alpha = a;
    hp.nu0 = res.nu0;
    if (hp.gamma > a) res.gamma_rule_waived = true;
    SweepRow row;
    row.alpha = a;
    row.threshold = 2.0 * hp.gamma * hp.nu0 / a;
    row.failure = run_into(cfg, nets, hp, lc, row.log);
    const CsvTable t = table_of(row.log);
    row.time_to_threshold = t.rows ? time_to_threshold(t, row.threshold) : 0.0;
    for (double v : t.col("weight_step")) row.weight_tv += v;
    res.rows.push_back(std::move(row));
  }
  res.time_non_increasing = res.tv_non_decreasing = true;
  for (std::size_t i = 1; i < res.rows.size(); ++i) {
    const auto& p = res.rows[i - 1];
    const auto& c = res.rows[i];
    if (c.time_to_threshold > p.time_to_threshold) res.time_non_increasing = false;
    if (c.weight_tv < p.weight_tv) res.tv_non_decreasing = false;
  }
  return res;
}

AblationResult dead_zone_ablation(const ExperimentConfig& cfg) {
  AblationResult res;
  std::optional<Nu0Calibration> cal;
  res.nu0 = nu0_for(cfg, cal);
  const NetworkBundle nets = starting_network(cfg, cal);
  const LoopConfig lc = loop_config(cfg);
  HyperParams hp = cfg.hp;
  hp.nu0 = res.nu0;
  res.failure = run_into(cfg, nets, hp, lc, res.dead_zone);
  if (res.failure) return res;
  hp.nu0 = 0.0;
  res.failure = run_into(cfg, nets, hp, lc, res.no_dead_zone);
  return res;
}

CompareResult compare_controllers(const ExperimentConfig& cfg) {
  CompareResult res;
  const Nu0Calibration cal = calibrate_noise_bound(cfg);
  res.nu0 = cfg.nu0_auto ? cal.nu0 : cfg.hp.nu0;
  const NetworkBundle warm = cfg.warm_start == "none" || cfg.warm_start == "prefit"
                                 ? cal.prefit
                                 : starting_network(cfg, cal);

  HyperParams hp = cfg.hp;
  hp.nu0 = res.nu0;
  LoopConfig lc = loop_config(cfg);
  lc.controller = ControllerKind::Pd;
  lc.learn = false;
  res.failure = run_into(cfg, warm, hp, lc, res.pd);
  if (res.failure) {
    res.failure->what = "pd: " + res.failure->what;
    return res;
  }

  lc.controller = ControllerKind::Nnidc;
  lc.learn = cfg.loop.learn;
  hp.rates = cfg.hp.rates.scaled(cfg.compare_rate_scale);
  res.failure = run_into(cfg, warm, hp, lc, res.nnidc);
  if (res.failure) res.failure->what = "nnidc: " + res.failure->what;

  const auto n = static_cast<Eigen::Index>(cfg.plant.dof);
  Vec gmax = Vec::Zero(n);
  for (const auto& s : res.pd.steps) {
    const DynamicsTerms d = ground_truth_terms(cfg.plant, s.q, Vec::Zero(n));
    gmax = gmax.cwiseMax(d.G.cwiseAbs());
  }
  const double scale = 1.0 + gmax.maxCoeff();
  for (Eigen::Index j = 0; j < n; ++j) {
    res.gravity_loaded.push_back(gmax(j) > 1e-9 * scale);
  }
  return res;
}

FirstOrderResult first_order_demo(const FirstOrderSettings& s, double dt) {
  FirstOrderResult res;
  res.pole = s.pole;
  HyperParams hp;
  hp.alpha = s.alpha;
  hp.gamma = s.gamma;
  hp.nu0 = s.nu0;
  hp.dt = dt;
  if (const auto why = validate_hyperparams(hp)) throw ConfigError(*why);

  const auto input = [](double t) {
    return std::sin(1.3 * t) + 0.5 * std::sin(4.1 * t + 0.4) +
           0.3 * std::sin(9.7 * t + 1.1);
  };
  const auto steps = static_cast<std::size_t>(std::llround(s.duration / dt));
  res.steps.reserve(steps);
  double y = 0.0;
  Eigen::Vector2d theta = Eigen::Vector2d::Zero();  // (â, b̂)
  Vec e_mod = Vec::Zero(1);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double u = input(t);
    const double ydot = -s.pole * y + s.gain * u;
    const Eigen::Vector2d phi(-y, u);
    const double eps = ydot - phi.dot(theta);
    e_mod = modified_error_step(e_mod, Vec::Constant(1, eps), hp.alpha, dt);
    const bool active = dead_zone_gate(e_mod, hp);
    if (active) theta += dt * s.rate * phi * eps;
    res.steps.push_back({t, y, u, ydot, theta(0), theta(1), eps,
                         e_mod.norm(), !active});

    const auto f = [&](double yy) { return -s.pole * yy + s.gain * u; };
    const double k1 = f(y), k2 = f(y + 0.5 * dt * k1), k3 = f(y + 0.5 * dt * k2),
                 k4 = f(y + dt * k3);
    y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  res.pole_estimate = theta(0);
  res.gain_estimate = theta(1);
  return res;
}

std::string output_directory(const ExperimentConfig& cfg) {
  fs::path dir(cfg.output_dir);
  if (dir.is_relative()) {
    if (const char* root = std::getenv("NNID_OUTPUT_ROOT"); root && *root) {
      dir = fs::path(root) / dir;
    }
  }
  return dir.string();
}

// =============================================================================
// Artifact writers
// =============================================================================

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

std::string csv_text(const RunLog& log) {
  std::ostringstream os;
  write_run_csv(os, log);
  return os.str();
}

std::string summary_text(const CsvTable& t) {
  std::ostringstream os;
  write_summary(os, summarize(t));
  return os.str();
}

void write_plots(const fs::path& dir, const CsvTable& t, const HyperParams& hp) {
  if (t.rows == 0) return;
  const std::size_t n = table_dof(t);
  const auto& x = t.col("t");

  std::vector<Series> tracking;
  for (std::size_t j = 1; j <= n; ++j) {
    tracking.push_back({fmt::format("q{}", j), t.col(fmt::format("q{}", j))});
    tracking.push_back({fmt::format("q{} ref", j), t.col(fmt::format("qref{}", j))});
  }
  save_line_plot((dir / "tracking.svg").string(), x, tracking,
                 {.title = "Joint tracking", .ylabel = "rad"});

  std::vector<double> e1(t.rows, 0.0);
  for (std::size_t j = 1; j <= n; ++j) {
    const auto& c = t.col(fmt::format("e1_{}", j));
    for (std::size_t i = 0; i < t.rows; ++i) e1[i] += c[i] * c[i];
  }
  for (double& v : e1) v = std::sqrt(v);
  const double r = dead_zone_radius(hp);
  PlotSpec err{.title = "Error norms", .ylabel = "norm", .log_y = true};
  if (r > 0.0) {
    err.hlines = {{r, "dead zone"}, {3.0 * r, "3 radii"}};
  }
  save_line_plot((dir / "error_norms.svg").string(), x,
                 {{"|e1|", e1}, {"|eps|", t.col("eps_norm")},
                  {"|e_mod|", t.col("emod_norm")}},
                 err);

  std::vector<Series> wn;
  for (const char* c : {"wn_M_hidden", "wn_M_output", "wn_C_hidden",
                        "wn_C_output", "wn_G_hidden", "wn_G_output"}) {
    wn.push_back({std::string(c).substr(3), t.col(c)});
  }
  save_line_plot((dir / "weight_norms.svg").string(), x, wn,
                 {.title = "Weight block norms", .ylabel = "Frobenius norm"});

  save_line_plot((dir / "lyapunov.svg").string(), x, {{"V", t.col("V")}},
                 {.title = "Lyapunov function", .ylabel = "V", .log_y = true});

  save_line_plot((dir / "regions.svg").string(), x,
                 {{"region", t.col("region")}},
                 {.title = "Operating region",
                  .ylabel = "region",
                  .step = true,
                  .hlines = {{1.0, "I"}, {2.0, "II"}, {3.0, "III"}, {4.0, "IV"}}});
}

/// run.csv, summary.txt and plots for one loop; returns the parsed table.
CsvTable write_run(const fs::path& dir, const RunLog& log, const HyperParams& hp,
                   bool plots) {
  fs::create_directories(dir);
  const std::string csv = csv_text(log);
  write_file(dir / "run.csv", csv);
  std::istringstream is(csv);
  const CsvTable t = read_csv(is);
  write_file(dir / "summary.txt", summary_text(t));
  if (plots) write_plots(dir, t, hp);
  return t;
}

void write_failure(const fs::path& dir, const Failure& f) {
  fs::create_directories(dir);
  write_file(dir / "FAILED", fmt::format("diverged at step {}: {}\n", f.step, f.what));
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

int scenario_identify(const ExperimentConfig& cfg, const fs::path& dir) {
  const IdentifyResult r = identify(cfg);
  HyperParams hp = cfg.hp;
  hp.nu0 = r.nu0;
  write_run(dir, r.log, hp, cfg.plots);
  std::ostringstream info;
  info << "scenario = identify\n"
       << "nu0 = " << num(r.nu0) << '\n'
       << "dead_zone_radius = " << num(dead_zone_radius(hp)) << '\n'
       << "emod_bound = " << num(3.0 * hp.gamma * hp.nu0 / hp.alpha) << '\n'
       << "theta_ref = final weights (second pass)\n";
  write_file(dir / "run_info.txt", info.str());
  if (r.failure) {
    write_failure(dir, *r.failure);
    return 3;
  }
  const auto& rc = r.recovery;
  std::ostringstream rec;
  rec << "grid_points = " << rc.points << '\n'
      << "M_initial = " << num(rc.M_initial) << "\nM_final = " << num(rc.M_final)
      << "\nC_initial = " << num(rc.C_initial) << "\nC_final = " << num(rc.C_final)
      << "\nG_initial = " << num(rc.G_initial) << "\nG_final = " << num(rc.G_final)
      << '\n';
  write_file(dir / "recovery.txt", rec.str());
  save_weights((dir / "weights_initial.txt").string(), r.initial);
  save_weights((dir / "weights_final.txt").string(), r.log.final_nets);
  return 0;
}

int scenario_sweep(const ExperimentConfig& cfg, const fs::path& dir) {
  const SweepResult res = alpha_sweep(cfg);
  fs::create_directories(dir);
  std::ostringstream csv;
  csv << "alpha,threshold,time_to_threshold,weight_tv,rms_e1_first,rms_e1_last,"
         "diverged\n";
  bool failed = false;
  for (const auto& row : res.rows) {
    HyperParams hp = cfg.hp;
    hp.alpha = row.alpha;
    hp.nu0 = res.nu0;
    const fs::path sub = dir / fmt::format("alpha_{:g}", row.alpha);
    const CsvTable t = write_run(sub, row.log, hp, cfg.plots);
    const SummaryReport s = summarize(t);
    csv << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{}\n",
                       row.alpha, row.threshold, row.time_to_threshold,
                       row.weight_tv, s.rms_e1_first, s.rms_e1_last,
                       row.failure ? 1 : 0);
    if (row.failure) {
      write_failure(sub, *row.failure);
      failed = true;
    }
  }
  write_file(dir / "sweep.csv", csv.str());
  std::ostringstream txt;
  txt << "scenario = alpha_sweep\nnu0 = " << num(res.nu0) << '\n'
      << "time_to_threshold_non_increasing = " << res.time_non_increasing << '\n'
      << "weight_tv_non_decreasing = " << res.tv_non_decreasing << '\n';
  if (res.gamma_rule_waived) {
    txt << "warning = gamma exceeds alpha for part of the sweep; the "
           "1 < gamma <= alpha rule is waived so gamma stays fixed\n";
  }
  write_file(dir / "sweep.txt", txt.str());
  return failed ? 3 : 0;
}

int scenario_ablation(const ExperimentConfig& cfg, const fs::path& dir) {
  const AblationResult res = dead_zone_ablation(cfg);
  HyperParams hp = cfg.hp;
  hp.nu0 = res.nu0;
  const CsvTable a = write_run(dir / "dead_zone", res.dead_zone, hp, cfg.plots);
  hp.nu0 = 0.0;
  const CsvTable b = write_run(dir / "no_dead_zone", res.no_dead_zone, hp, cfg.plots);
  const SummaryReport sa = summarize(a), sb = summarize(b);
  std::ostringstream txt;
  txt << "scenario = dead_zone_ablation\nnu0 = " << num(res.nu0) << '\n'
      << "late_weight_norm_variance_dead_zone = "
      << num(sa.late_weight_norm_variance) << '\n'
      << "late_weight_norm_variance_no_dead_zone = "
      << num(sb.late_weight_norm_variance) << '\n'
      << "frozen_steps_with_weight_change = "
      << sa.frozen_steps_with_weight_change << '\n'
      << "no_dead_zone_variance_larger = "
      << (sb.late_weight_norm_variance > sa.late_weight_norm_variance) << '\n';
  write_file(dir / "ablation.txt", txt.str());
  if (res.failure) {
    write_failure(dir, *res.failure);
    return 3;
  }
  return 0;
}

int scenario_compare(const ExperimentConfig& cfg, const fs::path& dir) {
  const CompareResult res = compare_controllers(cfg);
  HyperParams hp = cfg.hp;
  hp.nu0 = res.nu0;
  const SummaryReport pd = summarize(write_run(dir / "pd", res.pd, hp, cfg.plots));
  const SummaryReport nn =
      summarize(write_run(dir / "nnidc", res.nnidc, hp, cfg.plots));
  std::ostringstream txt;
  txt << "scenario = compare\nnu0 = " << num(res.nu0) << '\n';
  for (std::size_t j = 0; j < pd.tracking_rms.size(); ++j) {
    txt << fmt::format(
        "joint {}: gravity_loaded = {}, tracking_rms pd = {:.17g}, nnidc = "
        "{:.17g}; effort_rms pd = {:.17g}, nnidc = {:.17g}; effort_tv pd = "
        "{:.17g}, nnidc = {:.17g}\n",
        j + 1, j < res.gravity_loaded.size() && res.gravity_loaded[j] ? 1 : 0,
        pd.tracking_rms[j], j < nn.tracking_rms.size() ? nn.tracking_rms[j] : 0.0,
        pd.effort_rms[j], j < nn.effort_rms.size() ? nn.effort_rms[j] : 0.0,
        pd.effort_tv[j], j < nn.effort_tv.size() ? nn.effort_tv[j] : 0.0);
  }
  txt << "nnidc_fallback_fraction = " << num(nn.fallback_fraction) << '\n';
  write_file(dir / "compare.txt", txt.str());
  if (res.failure) {
    write_failure(dir, *res.failure);
    return 3;
  }
  return 0;
}

int scenario_first_order(const ExperimentConfig& cfg, const fs::path& dir) {
  const FirstOrderResult res = first_order_demo(cfg.first_order, cfg.hp.dt);
  fs::create_directories(dir);
  std::ostringstream csv;
  csv << "t,y,u,ydot,a_hat,b_hat,eps,emod_norm,dead_zone_active\n";
  std::vector<double> t, a, b;
  for (const auto& s : res.steps) {
    csv << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},"
                       "{:.17g},{}\n",
                       s.t, s.y, s.u, s.ydot, s.a_hat, s.b_hat, s.eps, s.emod,
                       s.in_dead_zone ? 1 : 0);
    t.push_back(s.t);
    a.push_back(s.a_hat);
    b.push_back(s.b_hat);
  }
  write_file(dir / "first_order.csv", csv.str());
  std::ostringstream txt;
  txt << "scenario = first_order_demo\n"
      << "pole = " << num(-res.pole) << '\n'
      << "pole_estimate = " << num(-res.pole_estimate) << '\n'
      << "pole_relative_error = "
      << num(std::abs(res.pole_estimate - res.pole) / res.pole) << '\n'
      << "gain = " << num(cfg.first_order.gain) << '\n'
      << "gain_estimate = " << num(res.gain_estimate) << '\n';
  write_file(dir / "first_order.txt", txt.str());
  if (cfg.plots) {
    save_line_plot((dir / "first_order.svg").string(), t,
                   {{"a_hat", a}, {"b_hat", b}},
                   {.title = "First-order identification",
                    .ylabel = "estimate",
                    .hlines = {{cfg.first_order.pole, "a"},
                               {cfg.first_order.gain, "b"}}});
  }
  return 0;
}

}  // namespace

int run_scenario(const ExperimentConfig& cfg) {
  check_config(cfg);
  const fs::path dir = output_directory(cfg);
  switch (cfg.scenario) {
    case Scenario::Identify: return scenario_identify(cfg, dir);
    case Scenario::AlphaSweep: return scenario_sweep(cfg, dir);
    case Scenario::DeadZoneAblation: return scenario_ablation(cfg, dir);
    case Scenario::Compare: return scenario_compare(cfg, dir);
    case Scenario::FirstOrderDemo: return scenario_first_order(cfg, dir);
  }
  return 0;
}

}  // namespace nnid
