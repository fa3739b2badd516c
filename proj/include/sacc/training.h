#pragma once

// Training of the AV controller. One evaluation rolls the platoon out once
// per SVO angle with the neural law in the AV slot and assembles
//
//   total = alpha * sum_phi L_pred(phi)
//         + beta  * sum_phi [cos(phi) U_self(phi) + sin(phi) U_coll(phi)]
//         + gamma * (sum_phi L_smooth(phi) + ramp(epoch) * L_trend)
//
// Gradients are obtained by a reverse sweep through the rollout: the IDM
// followers, the Euler updates and every controller invocation along the
// way. Floors and caps contribute the zero subgradient.

#include <cstdint>
#include <functional>
#include <vector>

#include "sacc/controller.h"
#include "sacc/losses.h"
#include "sacc/scenario.h"

namespace sacc {

// Fraction of gamma applied to the trend term: linear from 0 at epoch 0 to 1
// at `full_at_epoch`, flat afterwards. full_at_epoch <= 0 means always 1.
struct TrendRamp {
  int full_at_epoch = 100;
  double at(int epoch) const;
};

struct LossWeights {
  double alpha = 0.0;
  double beta = 1.0;
  double gamma = 0.01;
  TrendRamp ramp;
  TrendForm trend_form = TrendForm::kHinge;
};

void validate(const LossWeights& weights);

enum class OptimizerKind { kAdam, kGradientDescent };

struct TrainConfig {
  int epochs = 200;
  double learning_rate = 0.1;
  std::uint64_t seed = 7;
  std::vector<SvoAngle> phi_set = {SvoAngle::egoistic(),
                                   SvoAngle::prosocial(),
                                   SvoAngle::altruistic()};
  // Empty means consecutive pairs of phi_set.
  std::vector<PhiPair> phi_pairs;
  double v_target = 5.0;
  Scenario scenario;
  ControllerShape shape;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  // Average U_collective over every follower instead of the first one.
  bool collective_all_followers = false;
  int threads = 1;
};

void validate(const TrainConfig& cfg);

// Trend ramp reaching 1 halfway through `epochs`.
LossWeights default_weights_for(int epochs);

struct LossBreakdown {
  double prediction = 0.0;
  double cost = 0.0;
  double smoothness = 0.0;
  double trend = 0.0;
  double trend_weight = 0.0;  // ramp(epoch)
  double total = 0.0;
  std::vector<PhiUtility> utilities;
};

// Recombines the components with the given weights.
double recombine(const LossBreakdown& loss, const LossWeights& weights);

LossBreakdown evaluate_loss(const ControllerParams& params,
                            const TrainConfig& cfg,
                            const LossWeights& weights, int epoch);

struct GradientResult {
  LossBreakdown loss;
  ControllerParams grad;  // same shapes as the parameters
};

GradientResult gradient(const ControllerParams& params, const TrainConfig& cfg,
                        const LossWeights& weights, int epoch);

// Seeded initialization with normalization taken from the scenario's
// reference trajectory.
ControllerParams initial_controller(const TrainConfig& cfg);

struct TrainResult {
  ControllerParams params;
  std::vector<LossBreakdown> history;  // loss at the start of each epoch
  LossBreakdown final_loss;            // loss of the returned parameters
};

// Full-batch descent. Throws DivergenceError on a non-finite loss, gradient
// or parameter.
TrainResult train(const TrainConfig& cfg, const LossWeights& weights,
                  const std::function<void(int, const LossBreakdown&)>&
                      on_epoch = {});

// Rollout of the scenario with the trained controller at one angle.
RolloutResult rollout_controller(const ControllerParams& params,
                                 const Scenario& scenario, SvoAngle phi);

}  // namespace sacc
