#include "sacc/scenario.h"

#include <cmath>

#include <fmt/format.h>

#include "sacc/errors.h"

namespace sacc {

void validate(const Scenario& sc) {
  validate(sc.sim);
  const std::size_t steps = sc.sim.steps();
  const std::size_t n = sc.vehicle_count();
  for (const auto* series : {&sc.leader, &sc.av_reference}) {
    const auto check = validate_trajectory(*series);
    if (!check.ok()) {
      throw ConfigError(fmt::format("vehicle {} trajectory invalid: {}",
                                    series->vehicle_id,
                                    check.violations.front().invariant));
    }
    if (std::abs(series->dt - sc.sim.dt) > 1e-12 * sc.sim.dt) {
      throw ConfigError("trajectory dt differs from simulation dt");
    }
    if (series->size() < steps + 1) {
      throw ConfigError(fmt::format(
          "vehicle {} trajectory has {} samples, horizon needs {}",
          series->vehicle_id, series->size(), steps + 1));
    }
  }
  if (!sc.av_reference.spacings) {
    throw ConfigError("AV reference trajectory needs spacings");
  }
  for (const auto& p : sc.followers) validate(p);
  if (sc.initial.size() != n || sc.initial.spacings.size() != n - 1 ||
      sc.initial.positions.size() != n) {
    throw ConfigError(fmt::format(
        "initial state has {} vehicles, scenario has {}", sc.initial.size(), n));
  }
  if (sc.a_true.size() != steps) {
    throw ConfigError(fmt::format("a_true has {} samples, horizon has {} steps",
                                  sc.a_true.size(), steps));
  }
}

std::vector<double> forward_difference_accelerations(
    const TrajectorySeries& series, std::size_t steps) {
  if (series.size() < steps + 1) {
    throw ShapeError("series too short for the requested number of steps");
  }
  std::vector<double> out(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    out[k] = (series.speeds[k + 1] - series.speeds[k]) / series.dt;
  }
  return out;
}

FeatureNormalization normalization_from_reference(const Scenario& sc) {
  const auto& av = sc.av_reference;
  const std::size_t m = std::min(av.size(), sc.leader.size());
  if (m == 0 || !av.spacings) {
    throw ConfigError("normalization needs a reference AV trajectory");
  }
  std::array<double, kObservationDim> sum{}, sum_sq{};
  for (std::size_t k = 0; k < m; ++k) {
    const double x[kObservationDim] = {(*av.spacings)[k],
                                       sc.leader.speeds[k] - av.speeds[k],
                                       av.speeds[k]};
    for (int j = 0; j < kObservationDim; ++j) {
      sum[j] += x[j];
      sum_sq[j] += x[j] * x[j];
    }
  }
  FeatureNormalization norm;
  const double count = static_cast<double>(m);
  for (int j = 0; j < kObservationDim; ++j) {
    const double mean = sum[j] / count;
    const double var = std::max(0.0, sum_sq[j] / count - mean * mean);
    const double sd = std::sqrt(var);
    norm.offset[j] = mean;
    norm.scale[j] = sd > 1e-6 ? sd : 1.0;
  }
  return norm;
}

std::vector<AccelerationLaw> scenario_laws(const Scenario& sc,
                                           AccelerationLaw av_law) {
  std::vector<AccelerationLaw> laws;
  laws.reserve(sc.vehicle_count());
  laws.emplace_back(PlaybackLaw{sc.leader, 0});
  laws.push_back(std::move(av_law));
  for (const auto& p : sc.followers) laws.emplace_back(IdmLaw{p});
  return laws;
}

}  // namespace sacc
