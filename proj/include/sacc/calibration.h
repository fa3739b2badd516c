#pragma once

// IDM calibration by exhaustive grid search on spacing RMSE.

#include <cstddef>
#include <span>
#include <vector>

#include "sacc/core_model.h"

namespace sacc {

struct GridSpec {
  std::vector<double> v0, a_max, b, s0, tau, delta;

  // v0 {5}, a_max 0.50..2.00 by 0.05, b 0.50..3.00 by 0.25, s0 {3},
  // tau {1.5}, delta 1.00..5.00 by 0.25.
  static GridSpec defaults();

  std::size_t size() const;
  // Grid point at a flat index; delta varies fastest, v0 slowest, so flat
  // order is the lexicographic parameter order.
  IdmParams at(std::size_t index) const;
};

// Evenly spaced values from first to last inclusive.
std::vector<double> linspace_step(double first, double last, double step);

// Throws ConfigError for an empty, unsorted or non-positive axis.
void validate(const GridSpec& grid);

struct RankedParams {
  IdmParams params;
  double rmse = 0.0;
};

struct CalibrationReport {
  IdmParams best_params;
  double rmse = 0.0;
  std::size_t evaluated_count = 0;
  // Next best points after best_params, ascending rmse.
  std::vector<RankedParams> runner_ups;
};

double spacing_rmse(std::span<const double> predicted,
                    std::span<const double> actual);

// Rolls one IDM follower behind the recorded leader for cfg.steps() steps
// from (v, s) and returns its spacing at every sample, initial included.
std::vector<double> simulate_follower(const IdmParams& params,
                                      const TrajectorySeries& lead,
                                      double initial_speed,
                                      double initial_spacing,
                                      const SimConfig& cfg);

struct CalibrationOptions {
  std::size_t runner_ups = 5;
  // 0 picks the hardware concurrency.
  unsigned threads = 1;
};

// The follower starts from its first observed (v, s) sample and the horizon
// covers the whole observed series. Ties on rmse go to the lexicographically
// smaller parameter tuple, so the result does not depend on threads.
CalibrationReport grid_search_calibrate(const GridSpec& grid,
                                        const TrajectorySeries& lead,
                                        const TrajectorySeries& follower,
                                        const SimConfig& cfg,
                                        const CalibrationOptions& options = {});

}  // namespace sacc
