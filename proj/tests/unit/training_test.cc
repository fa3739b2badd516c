#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "sacc/errors.h"
#include "sacc/synthetic.h"
#include "sacc/training.h"

namespace sacc {
namespace {

// Relative error against a floor at the roundoff level of a central
// difference of the loss: eps |L| / h is about 1e-9 for |L| near 40.
double gradient_error(double analytic, double numeric, double loss) {
  const double floor = 1e-6 * std::max(1.0, std::abs(loss));
  return std::abs(analytic - numeric) / std::max(floor, std::abs(numeric));
}

TrainConfig short_config(double seconds = 2.0) {
  ScenarioSpec spec;
  spec.duration = seconds;
  TrainConfig cfg;
  cfg.scenario = gen_synthetic(spec).scenario;
  cfg.shape = {4, 5, 3.0};
  cfg.epochs = 5;
  return cfg;
}

TEST(TrendRamp, LinearThenFlat) {
  TrendRamp r{10};
  EXPECT_EQ(r.at(0), 0.0);
  EXPECT_EQ(r.at(5), 0.5);
  EXPECT_EQ(r.at(10), 1.0);
  EXPECT_EQ(r.at(50), 1.0);
  double prev = 0.0;
  for (int e = 0; e < 40; ++e) {
    EXPECT_GE(r.at(e), prev);
    prev = r.at(e);
  }
  EXPECT_EQ(default_weights_for(200).ramp.full_at_epoch, 100);
}

TEST(LossWeights, Validation) {
  LossWeights w;
  EXPECT_NO_THROW(validate(w));
  w.alpha = -1.0;
  EXPECT_THROW(validate(w), ConfigError);
  w = LossWeights{};
  w.alpha = w.beta = w.gamma = 0.0;
  EXPECT_THROW(validate(w), ConfigError);
}

TEST(EvaluateLoss, DecompositionIdentity) {
  const TrainConfig cfg = short_config();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int n = 0; n < 10; ++n) {
    LossWeights w = default_weights_for(10);
    w.alpha = u(rng);
    w.beta = u(rng);
    w.gamma = u(rng);
    const auto params = init_controller(cfg.shape, static_cast<std::uint64_t>(n));
    const LossBreakdown l = evaluate_loss(params, cfg, w, n);
    const double expected = w.alpha * l.prediction + w.beta * l.cost +
                            w.gamma * (l.smoothness + l.trend_weight * l.trend);
    EXPECT_NEAR(l.total, expected, 1e-12 * std::abs(expected));
    EXPECT_GE(l.prediction, 0.0);
    EXPECT_GE(l.cost, 0.0);
    EXPECT_GE(l.smoothness, 0.0);
    EXPECT_GE(l.trend, 0.0);
  }
}

TEST(EvaluateLoss, EgoisticCostOnlyIsSelfUtility) {
  TrainConfig cfg = short_config();
  cfg.phi_set = {SvoAngle::egoistic()};
  LossWeights w;
  w.alpha = 0.0;
  w.beta = 1.0;
  w.gamma = 0.0;
  const auto params = init_controller(cfg.shape, 3);
  const LossBreakdown l = evaluate_loss(params, cfg, w, 0);
  const RolloutResult r = rollout_controller(params, cfg.scenario, SvoAngle::egoistic());
  EXPECT_EQ(l.total, u_self(r.accelerations[1], cfg.scenario.sim.dt));
}

TEST(EvaluateLoss, PerfectPredictionHasZeroLoss) {
  TrainConfig cfg = short_config();
  auto params = ControllerParams::zeros(cfg.shape);
  params.normalization.scale = {1.0, 1.0, 1.0};
  // A zero controller predicts zero, so make the recorded target zero too.
  std::fill(cfg.scenario.a_true.begin(), cfg.scenario.a_true.end(), 0.0);
  LossWeights w;
  w.alpha = 1.0;
  w.beta = 0.0;
  w.gamma = 0.0;
  EXPECT_EQ(evaluate_loss(params, cfg, w, 0).total, 0.0);
}

TEST(Gradient, MatchesCentralDifferences) {
  const TrainConfig cfg = short_config();
  LossWeights w = default_weights_for(4);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto params = init_controller(cfg.shape, seed);
    const auto gr = gradient(params, cfg, w, 2);
    const auto g = gr.grad.flatten();
    const auto theta = params.flatten();
    double worst = 0.0;
    for (std::size_t j = 0; j < theta.size(); ++j) {
      auto tp = theta, tm = theta;
      tp[j] += 1e-5;
      tm[j] -= 1e-5;
      auto plus = params, minus = params;
      plus.unflatten(tp);
      minus.unflatten(tm);
      const double fd = (evaluate_loss(plus, cfg, w, 2).total -
                         evaluate_loss(minus, cfg, w, 2).total) / 2e-5;
      worst = std::max(worst, gradient_error(g[j], fd, gr.loss.total));
    }
    EXPECT_LT(worst, 1e-4) << "seed " << seed;
  }
}

TEST(Gradient, DeterministicAndThreadIndependent) {
  TrainConfig cfg = short_config();
  const auto params = init_controller(cfg.shape, 4);
  const auto w = default_weights_for(4);
  const auto a = gradient(params, cfg, w, 1).grad.flatten();
  cfg.threads = 3;
  const auto b = gradient(params, cfg, w, 1).grad.flatten();
  EXPECT_EQ(a, b);
}

TEST(Train, ZeroLearningRateKeepsInitialization) {
  TrainConfig cfg = short_config();
  cfg.epochs = 1;
  cfg.learning_rate = 0.0;
  const auto result = train(cfg, default_weights_for(1));
  EXPECT_TRUE(result.params == initial_controller(cfg));
  ASSERT_EQ(result.history.size(), 1u);
}

TEST(Train, ReducesLossOnShortScenario) {
  TrainConfig cfg = short_config(10.0);
  cfg.epochs = 30;
  cfg.learning_rate = 0.02;
  const auto result = train(cfg, default_weights_for(cfg.epochs));
  EXPECT_LT(result.final_loss.total, result.history.front().total);
}

TEST(Train, SameSeedSameWeights) {
  TrainConfig cfg = short_config();
  cfg.epochs = 3;
  const auto a = train(cfg, default_weights_for(3));
  const auto b = train(cfg, default_weights_for(3));
  EXPECT_TRUE(a.params == b.params);
}

TEST(Train, DivergenceReportsEpoch) {
  TrainConfig cfg = short_config();
  cfg.epochs = 3;
  cfg.learning_rate = std::numeric_limits<double>::infinity();
  EXPECT_THROW(train(cfg, default_weights_for(3)), ConfigError);
  cfg.learning_rate = 1e308;
  cfg.optimizer = OptimizerKind::kGradientDescent;
  try {
    train(cfg, default_weights_for(3));
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_GE(e.epoch(), 0);
    EXPECT_LT(e.epoch(), 3);
  }
}

}  // namespace
}  // namespace sacc
