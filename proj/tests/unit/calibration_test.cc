#include <cmath>

#include <gtest/gtest.h>

#include "sacc/calibration.h"
#include "sacc/dynamics.h"
#include "sacc/errors.h"
#include "sacc/synthetic.h"

namespace sacc {
namespace {

const IdmParams kRowV5{5.00, 1.70, 0.50, 3.00, 1.50, 5.00};

TEST(SpacingRmse, Examples) {
  EXPECT_EQ(spacing_rmse(std::vector<double>{10, 12}, std::vector<double>{10, 12}), 0.0);
  EXPECT_EQ(spacing_rmse(std::vector<double>{11, 13}, std::vector<double>{10, 12}), 1.0);
  EXPECT_NEAR(spacing_rmse(std::vector<double>{10, 14}, std::vector<double>{10, 12}),
              1.414214, 1e-6);
  EXPECT_THROW(spacing_rmse(std::vector<double>{1}, std::vector<double>{1, 2}), ShapeError);
  EXPECT_THROW(spacing_rmse(std::vector<double>{}, std::vector<double>{}), EmptyInputError);
}

TEST(SimulateFollower, EquilibriumIsAFixedPoint) {
  SimConfig cfg;
  cfg.horizon = 60.0;
  const TrajectorySeries lead{1, 0.1, 0.0, std::vector<double>(601, 2.0), std::nullopt};
  const double s_eq = idm_equilibrium_spacing(kRowV5, 2.0);
  for (double s : simulate_follower(kRowV5, lead, 2.0, s_eq, cfg)) {
    EXPECT_NEAR(s, s_eq, 1e-6);
  }
}

TEST(SimulateFollower, ZeroHorizon) {
  SimConfig cfg;
  cfg.horizon = 0.0;
  const TrajectorySeries lead{1, 0.1, 0.0, {2.0, 2.0}, std::nullopt};
  EXPECT_EQ(simulate_follower(kRowV5, lead, 2.0, 7.5, cfg), std::vector<double>{7.5});
}

struct Recorded {
  TrajectorySeries lead, follower;
};

Recorded synthetic_pair(const IdmParams& truth) {
  ScenarioSpec spec;
  spec.n_vehicles = 3;
  spec.duration = 60.0;
  spec.initial_spacings = {6.0, 6.0};
  spec.follower_params = {truth};
  const auto syn = gen_synthetic(spec);
  return {syn.trajectories[1], syn.trajectories[2]};
}

GridSpec small_grid() {
  GridSpec g;
  g.v0 = {5.0};
  g.a_max = {1.3, 1.5, 1.7, 1.9};
  g.b = {0.5, 1.0, 2.0};
  g.s0 = {2.5, 3.0};
  g.tau = {1.5};
  g.delta = {4.0, 5.0};
  return g;
}

TEST(GridSearch, RecoversGeneratingParameters) {
  const Recorded rec = synthetic_pair(kRowV5);
  SimConfig cfg;
  const auto report = grid_search_calibrate(small_grid(), rec.lead, rec.follower, cfg);
  EXPECT_EQ(report.best_params, kRowV5);
  EXPECT_LE(report.rmse, 1e-6);
  EXPECT_EQ(report.evaluated_count, small_grid().size());
  for (const auto& r : report.runner_ups) EXPECT_GE(r.rmse, report.rmse);
  // Self-consistency with an independent recomputation.
  SimConfig sim = cfg;
  sim.horizon = static_cast<double>(rec.follower.size() - 1) * rec.follower.dt;
  const auto predicted = simulate_follower(report.best_params, rec.lead,
                                           rec.follower.speeds[0],
                                           (*rec.follower.spacings)[0], sim);
  EXPECT_EQ(report.rmse, spacing_rmse(predicted, *rec.follower.spacings));
}

TEST(GridSearch, ParallelMatchesSerial) {
  const Recorded rec = synthetic_pair(IdmParams{5.0, 1.5, 1.0, 2.5, 1.5, 4.0});
  SimConfig cfg;
  const auto serial = grid_search_calibrate(small_grid(), rec.lead, rec.follower, cfg, {5, 1});
  const auto parallel = grid_search_calibrate(small_grid(), rec.lead, rec.follower, cfg, {5, 4});
  EXPECT_EQ(serial.best_params, parallel.best_params);
  EXPECT_EQ(serial.rmse, parallel.rmse);
  ASSERT_EQ(serial.runner_ups.size(), parallel.runner_ups.size());
  for (std::size_t i = 0; i < serial.runner_ups.size(); ++i) {
    EXPECT_EQ(serial.runner_ups[i].params, parallel.runner_ups[i].params);
    EXPECT_EQ(serial.runner_ups[i].rmse, parallel.runner_ups[i].rmse);
  }
}

TEST(GridSearch, TiesGoToLexicographicallySmallest) {
  // The follower never sees its leader through a huge gap, so b and s0 do
  // not change its spacing trajectory beyond rounding.
  ScenarioSpec spec;
  spec.n_vehicles = 3;
  spec.duration = 5.0;
  spec.initial_spacings = {6.0, 1e6};
  spec.follower_params = {kRowV5};
  const auto syn = gen_synthetic(spec);
  GridSpec g = small_grid();
  g.b = {0.5, 0.5 + 1e-300 + 0.25};
  const auto report = grid_search_calibrate(g, syn.trajectories[1], syn.trajectories[2],
                                            SimConfig{});
  if (!report.runner_ups.empty() && report.runner_ups[0].rmse == report.rmse) {
    EXPECT_LT(report.best_params, report.runner_ups[0].params);
  }
}

TEST(GridSearch, MorePointsNeverWorsen) {
  const Recorded rec = synthetic_pair(IdmParams{5.0, 1.45, 1.1, 2.8, 1.5, 4.4});
  SimConfig cfg;
  GridSpec g = small_grid();
  const double coarse = grid_search_calibrate(g, rec.lead, rec.follower, cfg).rmse;
  g.a_max.insert(g.a_max.begin() + 1, 1.45);
  const double fine = grid_search_calibrate(g, rec.lead, rec.follower, cfg).rmse;
  EXPECT_LE(fine, coarse);
}

TEST(GridSearch, OnePointGrid) {
  const Recorded rec = synthetic_pair(kRowV5);
  GridSpec g;
  g.v0 = {5.0};
  g.a_max = {1.0};
  g.b = {1.0};
  g.s0 = {2.0};
  g.tau = {1.0};
  g.delta = {4.0};
  const auto report = grid_search_calibrate(g, rec.lead, rec.follower, SimConfig{});
  EXPECT_EQ(report.best_params, g.at(0));
  EXPECT_TRUE(report.runner_ups.empty());
  EXPECT_GT(report.rmse, 0.0);
}

TEST(GridSearch, InvalidGrids) {
  const Recorded rec = synthetic_pair(kRowV5);
  GridSpec g = small_grid();
  g.delta.clear();
  EXPECT_THROW(grid_search_calibrate(g, rec.lead, rec.follower, SimConfig{}), ConfigError);
  g = small_grid();
  g.b = {1.0, 0.5};
  EXPECT_THROW(grid_search_calibrate(g, rec.lead, rec.follower, SimConfig{}), ConfigError);
}

TEST(GridSpec, DefaultsAndOrdering) {
  const GridSpec g = GridSpec::defaults();
  EXPECT_EQ(g.a_max.size(), 31u);
  EXPECT_EQ(g.b.size(), 11u);
  EXPECT_EQ(g.delta.size(), 17u);
  EXPECT_EQ(g.a_max[3], 0.65);
  for (std::size_t i = 1; i < g.size(); i += 97) EXPECT_LT(g.at(i - 1), g.at(i));
}

}  // namespace
}  // namespace sacc
