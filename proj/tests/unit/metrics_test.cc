#include <gtest/gtest.h>

#include "sacc/errors.h"
#include "sacc/losses.h"
#include "sacc/metrics.h"

namespace sacc {
namespace {

// Two vehicles held at constant speeds and accelerations for `steps` steps.
RolloutResult constant_rollout(double v_lead, double v_follow, double a_follow,
                               std::size_t steps) {
  RolloutResult r;
  for (std::size_t k = 0; k <= steps; ++k) {
    PlatoonState s;
    s.time = 0.1 * static_cast<double>(k);
    s.positions = {0.0, -10.0};
    s.speeds = {v_lead, v_follow};
    s.spacings = {5.5};
    r.states.push_back(s);
  }
  r.accelerations = {std::vector<double>(steps, 0.0),
                     std::vector<double>(steps, a_follow)};
  r.flags.resize(steps);
  return r;
}

TEST(EnergyIndicator, SharesSelfUtility) {
  const std::vector<double> a = {1.0, 1.0, 1.0};
  EXPECT_EQ(energy_indicator(a, 1.0), 1.5);
  EXPECT_EQ(energy_indicator(std::vector<double>(4, 0.0), 0.1), 0.0);
  const std::vector<double> b = {0.3, -2.1, 0.7, 1e-3};
  EXPECT_EQ(energy_indicator(b, 0.1), u_self(b, 0.1));
}

TEST(AverageSpeed, Examples) {
  EXPECT_EQ(average_speed(std::vector<double>(7, 2.0)), 2.0);
  EXPECT_EQ(average_speed(std::vector<double>{1.0, 3.0}), 2.0);
  std::vector<double> halves(100, 1.79);
  halves.insert(halves.end(), 100, 3.63);
  EXPECT_NEAR(average_speed(halves), 2.71, 1e-12);
  EXPECT_THROW(average_speed(std::vector<double>{}), EmptyInputError);
}

TEST(PercentChange, Examples) {
  EXPECT_NEAR(percent_change(1.79, 2.71), 51.40, 0.005);
  EXPECT_EQ(percent_change(3.3, 3.3), 0.0);
  EXPECT_EQ(percent_change(2.0, 3.0), 50.0);
  EXPECT_THROW(percent_change(0.0, 1.0), UndefinedBaselineError);
}

TEST(PercentChange, InvertsScaling) {
  for (double b : {0.01, 0.7, 3.0, 1234.5}) {
    for (double p : {-50.0, 0.5, 12.34, 300.0}) {
      EXPECT_NEAR(percent_change(b, b * (1 + p / 100)), p, 1e-9 * std::abs(p));
    }
  }
}

TEST(BuildTable, SingleBaselineColumnIsAllZero) {
  const PhiRollout r[] = {{SvoAngle::egoistic(), constant_rollout(2.0, 2.0, 0.5, 10)}};
  const auto t = build_table(r, SvoAngle::egoistic(), 0.1);
  for (const auto& row : t.speed_change) EXPECT_EQ(*row[0], 0.0);
  EXPECT_EQ(*t.energy_change[1][0], 0.0);
  EXPECT_FALSE(t.energy_change[0][0].has_value());  // leader has zero energy
}

TEST(BuildTable, HandBuiltConstantRollouts) {
  const PhiRollout r[] = {{SvoAngle::egoistic(), constant_rollout(2.0, 2.0, 0.5, 10)},
                          {SvoAngle::altruistic(), constant_rollout(2.0, 3.0, 1.0, 10)}};
  const auto t = build_table(r, SvoAngle::egoistic(), 0.1);
  // energy: 10 * 0.5 * a^2 * 0.1 -> 0.125 and 0.5
  EXPECT_NEAR(t.cells[1][0].energy, 0.125, 1e-15);
  EXPECT_NEAR(t.cells[1][1].energy, 0.5, 1e-15);
  EXPECT_NEAR(*t.energy_change[1][1], 300.0, 1e-12);
  EXPECT_NEAR(*t.speed_change[1][1], 50.0, 1e-12);
  EXPECT_EQ(*t.speed_change[0][1], 0.0);
  EXPECT_FALSE(t.warnings.empty());  // leader energy baseline is zero
  const auto again = build_table(r, SvoAngle::egoistic(), 0.1);
  EXPECT_EQ(format_table(t), format_table(again));
}

TEST(BuildTable, Errors) {
  const PhiRollout r[] = {{SvoAngle::egoistic(), constant_rollout(2.0, 2.0, 0.5, 10)},
                          {SvoAngle::altruistic(), constant_rollout(2.0, 3.0, 1.0, 12)}};
  EXPECT_THROW(build_table(r, SvoAngle::egoistic(), 0.1), ShapeError);
  const PhiRollout one[] = {{SvoAngle::altruistic(), constant_rollout(2.0, 2.0, 0.5, 10)}};
  EXPECT_THROW(build_table(one, SvoAngle::egoistic(), 0.1), ConfigError);
}

TEST(FormatTable, UndefinedCellsAreLabelled) {
  const PhiRollout r[] = {{SvoAngle::egoistic(), constant_rollout(2.0, 2.0, 0.0, 10)}};
  const auto text = format_table(build_table(r, SvoAngle::egoistic(), 0.1));
  EXPECT_NE(text.find("undefined"), std::string::npos);
  EXPECT_EQ(text.find("inf"), std::string::npos);
}

}  // namespace
}  // namespace sacc
