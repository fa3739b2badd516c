#pragma once

// Post-hoc evaluation: per-vehicle energy indicator and average speed across
// social preference settings, with changes relative to a baseline setting.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sacc/core_model.h"
#include "sacc/dynamics.h"

namespace sacc {

// Same quantity the trainer minimizes as the self utility.
double energy_indicator(std::span<const double> accelerations, double dt);

// Arithmetic mean. Throws EmptyInputError on an empty series.
double average_speed(std::span<const double> speeds);

// 100 (value - baseline) / baseline. Throws UndefinedBaselineError when the
// baseline is zero.
double percent_change(double baseline, double value);

struct PhiRollout {
  SvoAngle phi;
  RolloutResult rollout;
};

struct MetricCell {
  double energy = 0.0;
  double avg_speed = 0.0;
};

struct EvaluationTable {
  std::vector<SvoAngle> phis;
  std::size_t baseline = 0;  // index into phis
  std::vector<int> vehicle_ids;
  // [vehicle][phi]
  std::vector<std::vector<MetricCell>> cells;
  // Empty when the baseline value is zero.
  std::vector<std::vector<std::optional<double>>> energy_change;
  std::vector<std::vector<std::optional<double>>> speed_change;
  std::vector<std::string> warnings;
};

// Baseline raw values below this magnitude make percentages unstable.
inline constexpr double kSmallBaseline = 1e-3;

// Vehicle ids are 1-based platoon positions. Throws ConfigError when the
// baseline phi is absent, ShapeError when rollouts differ in shape.
EvaluationTable build_table(std::span<const PhiRollout> rollouts,
                            SvoAngle baseline_phi, double dt);

// Aligned text rendering: raw values, then percentage changes with two
// decimals ("undefined" for a zero baseline).
std::string format_table(const EvaluationTable& table);

}  // namespace sacc
