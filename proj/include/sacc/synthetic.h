#pragma once

// Deterministic synthetic platoon scenarios standing in for recorded ring
// experiments: an oscillating low-speed leader, an IDM driver in the AV slot
// whose accelerations serve as the prediction target, and IDM followers.

#include <cstdint>
#include <filesystem>
#include <variant>
#include <vector>

#include "sacc/core_model.h"
#include "sacc/dynamics.h"
#include "sacc/scenario.h"

namespace sacc {

struct CsvProfile {
  std::filesystem::path path;
  int vehicle_id = 1;
};

// mean - amplitude * cos(2 pi t / period + phase): phase 0 starts the
// leader in the trough of the wave.
struct SinusoidProfile {
  double mean = 2.5;
  double amplitude = 1.5;
  double period = 60.0;
  double phase = 0.0;
};

struct PiecewiseSegment {
  double duration = 0.0;
  double speed = 0.0;
};

// Constant speed per segment; the last speed holds past the final segment.
struct PiecewiseProfile {
  std::vector<PiecewiseSegment> segments;
};

using LeaderProfile = std::variant<CsvProfile, SinusoidProfile, PiecewiseProfile>;

struct ScenarioSpec {
  int n_vehicles = 5;
  LeaderProfile leader = SinusoidProfile{};
  // Gap of vehicle i + 1 behind vehicle i, n_vehicles - 1 entries.
  std::vector<double> initial_spacings = {80.0, 5.0, 5.0, 5.0};
  // Drives the AV slot when generating the reference behavior.
  IdmParams av_reference{5.00, 1.19, 0.50, 3.00, 1.50, 2.81};
  // Followers behind the AV, n_vehicles - 2 entries.
  std::vector<IdmParams> follower_params = {
      {5.00, 1.19, 0.50, 3.00, 1.50, 2.81},
      {5.00, 1.31, 3.00, 3.00, 1.50, 5.00},
      {5.00, 1.70, 0.50, 3.00, 1.50, 5.00},
  };
  double duration = 120.0;
  double dt = 0.1;
  double vehicle_length = 4.5;
  double min_spacing_floor = 0.1;
  // Gaussian jitter added to the leader profile; 0 keeps it exact.
  double leader_noise_std = 0.0;
  std::uint64_t seed = 7;
};

// Throws ConfigError on an inconsistent spec.
void validate(const ScenarioSpec& spec);

struct SyntheticScenario {
  Scenario scenario;
  // Every vehicle's trajectory under the reference drivers, ids 1..n.
  std::vector<TrajectorySeries> trajectories;
};

SyntheticScenario gen_synthetic(const ScenarioSpec& spec);

// Builds a scenario from recorded trajectories (vehicle 1 leader, vehicle 2
// the AV reference, the rest followers) and follower parameters.
Scenario scenario_from_trajectories(std::span<const TrajectorySeries> series,
                                    std::span<const IdmParams> followers,
                                    double vehicle_length = 4.5,
                                    double min_spacing_floor = 0.1);

}  // namespace sacc
