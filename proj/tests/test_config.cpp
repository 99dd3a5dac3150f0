#include "nnid/config.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace nnid {
namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

// Message of the ConfigError thrown by `text`, or "" if it parses.
std::string rejection(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool mentions(const std::string& message, const std::string& needle) {
  return message.find(needle) != std::string::npos;
}

TEST(Config, EmptyFileGivesDefaults) {
  const ExperimentConfig cfg = parse("");
  const ExperimentConfig def = default_config();
  EXPECT_EQ(cfg.scenario, Scenario::Identify);
  EXPECT_EQ(cfg.plant.dof, 2u);
  EXPECT_EQ(cfg.hp.alpha, def.hp.alpha);
  EXPECT_EQ(cfg.hp.gamma, def.hp.gamma);
  EXPECT_TRUE(cfg.nu0_auto);
  EXPECT_EQ(cfg.loop.gains.kp, def.loop.gains.kp);
  EXPECT_EQ(cfg.loop.controller, ControllerKind::Pd);
}

TEST(Config, ParsesSectionsAndBroadcastsLists) {
  const ExperimentConfig cfg = parse(
      "; comment\n"
      "[scenario]\nkind = alpha_sweep\n"
      "[learner]\nalpha = 12.5\ngamma = 3\nnu0 = 0.02\nlambda2 = 4\n"
      "[controller]\nkind = pd\nkp = 40, 20\nkd = 2\n"
      "[run]\nduration = 7\nseed = 11\nnoise_std = 1e-4\nlearn = false\n"
      "[sweep]\nalphas = 2, 4, 8\n"
      "[output]\ndir = somewhere\nplots = no\n");
  EXPECT_EQ(cfg.scenario, Scenario::AlphaSweep);
  EXPECT_EQ(cfg.hp.alpha, 12.5);
  EXPECT_EQ(cfg.hp.gamma, 3.0);
  EXPECT_FALSE(cfg.nu0_auto);
  EXPECT_EQ(cfg.hp.nu0, 0.02);
  EXPECT_EQ(cfg.hp.lw.lambda2, 4.0);
  EXPECT_EQ(cfg.loop.gains.kp, Vec(Eigen::Vector2d(40, 20)));
  EXPECT_EQ(cfg.loop.gains.kd, Vec(Eigen::Vector2d(2, 2)));
  EXPECT_EQ(cfg.loop.duration, 7.0);
  EXPECT_EQ(cfg.loop.seed, 11u);
  EXPECT_EQ(cfg.loop.noise_std, 1e-4);
  EXPECT_FALSE(cfg.loop.learn);
  EXPECT_EQ(cfg.sweep_alphas, (std::vector<double>{2, 4, 8}));
  EXPECT_EQ(cfg.output_dir, "somewhere");
  EXPECT_FALSE(cfg.plots);
}

TEST(Config, AnthropomorphicPlant) {
  const ExperimentConfig cfg = parse("[plant]\nkind = anthropomorphic\ndof = 3\n");
  EXPECT_EQ(cfg.plant.dof, 3u);
  EXPECT_EQ(cfg.loop.gains.kp.size(), 3);
  EXPECT_EQ(cfg.reference.size(), 3u);
  EXPECT_TRUE(mentions(rejection("[plant]\nkind = anthropomorphic\ndof = 2\n"), "plant.dof"));
}

TEST(Config, RejectsUnknownKeysAndSections) {
  EXPECT_TRUE(mentions(rejection("[learner]\nalpah = 3\n"), "learner.alpah"));
  EXPECT_TRUE(mentions(rejection("[nonsense]\nx = 1\n"), "nonsense.x"));
  EXPECT_TRUE(mentions(rejection("alpha = 3\n"), "outside a section"));
}

TEST(Config, RejectsMalformedValues) {
  EXPECT_TRUE(mentions(rejection("[learner]\nalpha = ten\n"), "learner.alpha"));
  EXPECT_TRUE(mentions(rejection("[learner]\nalpha = inf\n"), "learner.alpha"));
  EXPECT_TRUE(mentions(rejection("[run]\nlearn = maybe\n"), "run.learn"));
  EXPECT_TRUE(mentions(rejection("[run]\nseed = -1\n"), "run.seed"));
  EXPECT_TRUE(mentions(rejection("[controller]\nkp = 1, 2, 3\n"), "controller.kp"));
  EXPECT_TRUE(mentions(rejection("[scenario]\nkind = everything\n"), "everything"));
  EXPECT_TRUE(mentions(rejection("[controller]\nkp = -5\n"), "gains"));
  EXPECT_TRUE(mentions(rejection("[output]\ngrid_points = 1\n"), "grid_points"));
}

TEST(Config, HyperparameterGateGivesSpecificReasons) {
  EXPECT_TRUE(mentions(rejection("[learner]\ngamma = 1\n"), "gamma"));
  EXPECT_TRUE(mentions(rejection("[learner]\nalpha = 5\ngamma = 6\n"), "must not exceed alpha"));
  EXPECT_TRUE(mentions(rejection("[learner]\nlambda1 = 1\n"), "lambda1"));
  EXPECT_TRUE(mentions(rejection("[learner]\nlambda2 = 0.5\n"), "lambda2"));
  EXPECT_TRUE(mentions(rejection("[learner]\nlambda3 = 1\n"), "lambda3"));
  EXPECT_TRUE(mentions(rejection("[learner]\nalpha = 2000\n"), "dt*alpha"));
  EXPECT_TRUE(mentions(rejection("[learner]\ndt = 0.01\nalpha = 200\n"), "dt*alpha"));
  EXPECT_EQ(rejection("[learner]\nalpha = 5\ngamma = 5\n"), "");
}

TEST(Config, SweepWaivesGammaAlphaOrderingOnly) {
  EXPECT_EQ(rejection("[scenario]\nkind = alpha_sweep\n[learner]\ngamma = 2\n[sweep]\nalphas = 1, 5\n"), "");
  EXPECT_TRUE(mentions(rejection("[scenario]\nkind = alpha_sweep\n[sweep]\nalphas = 1, 2500\n"), "dt*alpha"));
  EXPECT_TRUE(mentions(rejection("[scenario]\nkind = alpha_sweep\n[learner]\ngamma = 0.5\n"), "gamma"));
}

TEST(Config, Overrides) {
  ExperimentConfig cfg = default_config();
  apply_override(cfg, "learner.alpha", "15");
  EXPECT_EQ(cfg.hp.alpha, 15.0);
  apply_override(cfg, "learner.nu0", "0.3");
  EXPECT_FALSE(cfg.nu0_auto);
  EXPECT_EQ(cfg.hp.nu0, 0.3);
  apply_override(cfg, "learner.nu0", "auto");
  EXPECT_TRUE(cfg.nu0_auto);
  apply_override(cfg, "run.seed", "9");
  EXPECT_EQ(cfg.loop.seed, 9u);
  EXPECT_THROW(apply_override(cfg, "learner.bogus", "1"), ConfigError);
  EXPECT_THROW(apply_override(cfg, "plant.dof", "3"), ConfigError);
  EXPECT_THROW(apply_override(cfg, "learner.gamma", "0.9"), ConfigError);
}

TEST(Config, ScenarioNamesRoundTrip) {
  for (Scenario s : {Scenario::Identify, Scenario::AlphaSweep, Scenario::DeadZoneAblation,
                     Scenario::Compare, Scenario::FirstOrderDemo}) {
    EXPECT_EQ(scenario_from_string(to_string(s)), s);
  }
  EXPECT_THROW(load_config("/nonexistent/file.ini"), ConfigError);
}

}  // namespace
}  // namespace nnid
