#include "nnid/experiments.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace nnid {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nnid_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

TEST(FirstOrder, PoleWithinFivePercent) {
  const FirstOrderSettings s;
  const FirstOrderResult r = first_order_demo(s, 1e-3);
  EXPECT_EQ(r.pole, s.pole);
  EXPECT_LT(std::abs(r.pole_estimate - s.pole) / s.pole, 0.05);
  EXPECT_LT(std::abs(r.gain_estimate - s.gain) / std::abs(s.gain), 0.05);
  ASSERT_FALSE(r.steps.empty());
  for (std::size_t k = 1; k < r.steps.size(); ++k) {
    if (r.steps[k].in_dead_zone) {
      ASSERT_EQ(r.steps[k].a_hat, r.steps[k - 1].a_hat);
      ASSERT_EQ(r.steps[k].b_hat, r.steps[k - 1].b_hat);
    }
  }
}

TEST(FirstOrder, OtherPoles) {
  for (double pole : {0.5, 5.0}) {
    FirstOrderSettings s;
    s.pole = pole;
    s.duration = 200.0;  // a fast pole leaves little output to adapt a_hat on
    const FirstOrderResult r = first_order_demo(s, 1e-3);
    EXPECT_LT(std::abs(r.pole_estimate - pole) / pole, 0.05) << "pole " << pole;
  }
}

TEST(Scenario, IdentifyIsByteDeterministic) {
  const auto run = [](const std::string& name) {
    const fs::path dir = scratch_dir(name);
    ExperimentConfig cfg = parse(
        "[run]\nduration = 0.3\nnoise_std = 1e-5\n"
        "[kalman]\njerk_density = 1e5\n"
        "[learner]\nnu0 = 0.05\n"
        "[output]\nplots = false\ngrid_points = 2\ndir = " + dir.string() + "\n");
    EXPECT_EQ(run_scenario(cfg), 0);
    return dir;
  };
  const fs::path a = run("det_a"), b = run("det_b");
  const std::string csv = slurp(a / "run.csv");
  EXPECT_GT(csv.size(), 1000u);
  EXPECT_EQ(csv, slurp(b / "run.csv"));
  EXPECT_EQ(slurp(a / "summary.txt"), slurp(b / "summary.txt"));
  EXPECT_EQ(slurp(a / "weights_final.txt"), slurp(b / "weights_final.txt"));
}

TEST(Scenario, SummaryIsRecomputableFromCsv) {
  const fs::path dir = scratch_dir("summary");
  ExperimentConfig cfg = parse(
      "[run]\nduration = 0.4\n[learner]\nnu0 = 0.05\n"
      "[output]\nplots = true\ngrid_points = 2\ndir = " + dir.string() + "\n");
  ASSERT_EQ(run_scenario(cfg), 0);
  std::ostringstream again;
  write_summary(again, summarize(read_csv_file((dir / "run.csv").string())));
  EXPECT_EQ(again.str(), slurp(dir / "summary.txt"));
  for (const char* plot : {"tracking.svg", "error_norms.svg", "weight_norms.svg", "lyapunov.svg", "regions.svg"}) {
    EXPECT_TRUE(fs::exists(dir / plot)) << plot;
  }
}

TEST(Scenario, DivergenceLeavesPartialCsvAndMarker) {
  const fs::path dir = scratch_dir("diverge");
  ExperimentConfig cfg = parse(
      "[run]\nduration = 1\n"
      "[learner]\nnu0 = 0\nrate_m_hidden = 1e7\nrate_m_output = 1e7\nrate_c_hidden = 1e7\n"
      "rate_c_output = 1e7\nrate_g_hidden = 1e7\nrate_g_output = 1e7\n"
      "[output]\nplots = false\ngrid_points = 2\ndir = " + dir.string() + "\n");
  EXPECT_EQ(run_scenario(cfg), 3);
  ASSERT_TRUE(fs::exists(dir / "FAILED"));
  EXPECT_EQ(slurp(dir / "FAILED").rfind("diverged at step ", 0), 0u);
  EXPECT_TRUE(fs::exists(dir / "run.csv"));
}

TEST(Scenario, InvalidConfigIsRejected) {
  ExperimentConfig cfg = default_config();
  cfg.hp.gamma = 0.5;
  EXPECT_THROW(run_scenario(cfg), ConfigError);
}

TEST(Scenario, FirstOrderArtifacts) {
  const fs::path dir = scratch_dir("first_order");
  ExperimentConfig cfg = parse("[scenario]\nkind = first_order_demo\n[output]\ndir = " + dir.string() + "\n");
  ASSERT_EQ(run_scenario(cfg), 0);
  EXPECT_TRUE(fs::exists(dir / "first_order.csv"));
  EXPECT_TRUE(fs::exists(dir / "first_order.svg"));
  const std::string first = slurp(dir / "first_order.csv");
  ASSERT_EQ(run_scenario(cfg), 0);
  EXPECT_EQ(first, slurp(dir / "first_order.csv"));
}

TEST(Compare, ExactEstimatesTrackBetterOnGravityLoadedJoints) {
  // Networks fitted offline to the true terms along the reference, then
  // used frozen: the computed-torque loop must beat plain PD wherever
  // gravity loads the joint.
  const ExperimentConfig base = default_config();
  const PlantModel& plant = base.plant;
  std::vector<PlantState> points;
  for (int k = 0; k < 400; ++k) {
    const Reference r = excitation_reference(0.05 * k, base.reference);
    points.push_back({r.q, r.qdot, 0.0});
  }
  const NetworkBundle exact =
      fit_to_ground_truth(initial_network(base), plant, points, {.max_iterations = 60});

  LoopConfig loop = base.loop;
  loop.gains = {Vec::Constant(2, 100.0), Vec::Constant(2, 5.0)};
  loop.band = plant_band(base);
  loop.learn = false;
  loop.duration = 10.0;
  loop.controller = ControllerKind::Pd;
  const SummaryReport pd = summarize_log(run_identification_loop(plant, exact, base.hp, loop));
  loop.controller = ControllerKind::Nnidc;
  const SummaryReport nn = summarize_log(run_identification_loop(plant, exact, base.hp, loop));
  for (std::size_t j = 0; j < 2; ++j) {
    EXPECT_LT(nn.tracking_rms[j], pd.tracking_rms[j]) << "joint " << j + 1;
  }
  EXPECT_EQ(nn.fallback_fraction, 0.0);
}

TEST(Recovery, IdenticalNetworksGiveEqualErrors) {
  ExperimentConfig cfg = default_config();
  cfg.loop.duration = 0.2;
  cfg.loop.band = plant_band(cfg);
  const NetworkBundle nets = initial_network(cfg);
  cfg.loop.learn = false;
  const RunLog log = run_identification_loop(cfg.plant, nets, cfg.hp, cfg.loop);
  const RecoveryReport r = term_recovery(cfg.plant, nets, nets, log, 3);
  EXPECT_EQ(r.points, 9u);
  EXPECT_EQ(r.M_initial, r.M_final);
  EXPECT_EQ(r.G_initial, r.G_final);
  EXPECT_GT(r.G_initial, 0.0);
}

}  // namespace
}  // namespace nnid
