#pragma once

#include <vector>

#include "sacc/controller.h"
#include "sacc/core_model.h"
#include "sacc/dynamics.h"

namespace sacc {

// A mixed platoon experiment: vehicle 0 replays `leader`, vehicle 1 is the
// controlled AV whose recorded behavior is `av_reference`, and vehicles
// 2..n-1 are IDM followers.
struct Scenario {
  TrajectorySeries leader;
  TrajectorySeries av_reference;
  std::vector<IdmParams> followers;
  PlatoonState initial;
  SimConfig sim;
  // Recorded AV acceleration per step: forward differences of the
  // reference speeds. Length sim.steps().
  std::vector<double> a_true;

  std::size_t vehicle_count() const { return followers.size() + 2; }
};

// Throws ConfigError when the pieces do not describe one consistent
// experiment (lengths, dt, initial state).
void validate(const Scenario& scenario);

// (v[k+1] - v[k]) / dt for k < steps.
std::vector<double> forward_difference_accelerations(
    const TrajectorySeries& series, std::size_t steps);

// Mean and standard deviation of (spacing, relative speed, speed) over the
// reference AV trajectory. A degenerate feature keeps unit scale.
FeatureNormalization normalization_from_reference(const Scenario& scenario);

// Leader playback, the given AV law, IDM followers.
std::vector<AccelerationLaw> scenario_laws(const Scenario& scenario,
                                           AccelerationLaw av_law);

}  // namespace sacc
