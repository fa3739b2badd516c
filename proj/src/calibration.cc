#include "sacc/calibration.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include <fmt/format.h>

#include "sacc/dynamics.h"
#include "sacc/errors.h"

namespace sacc {
namespace {

void check_axis(const std::vector<double>& axis, const char* name) {
  if (axis.empty()) throw ConfigError(fmt::format("grid axis {} is empty", name));
  for (std::size_t i = 0; i < axis.size(); ++i) {
    if (!(axis[i] > 0.0) || !std::isfinite(axis[i])) {
      throw ConfigError(fmt::format("grid axis {} has non-positive value {}",
                                    name, axis[i]));
    }
    if (i > 0 && !(axis[i] > axis[i - 1])) {
      throw ConfigError(fmt::format("grid axis {} is not strictly ascending",
                                    name));
    }
  }
}

}  // namespace

std::vector<double> linspace_step(double first, double last, double step) {
  if (!(step > 0.0) || last < first) {
    throw ConfigError(fmt::format("bad range {}..{} step {}", first, last, step));
  }
  const auto count =
      static_cast<std::size_t>(std::floor((last - first) / step + 1e-9)) + 1;
  std::vector<double> out(count);
  // Rounded to 1e-9 so that 0.5 + 3 * 0.05 prints and compares as 0.65.
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = std::round((first + static_cast<double>(i) * step) * 1e9) / 1e9;
  }
  return out;
}

GridSpec GridSpec::defaults() {
  GridSpec g;
  g.v0 = {5.0};
  g.a_max = linspace_step(0.50, 2.00, 0.05);
  g.b = linspace_step(0.50, 3.00, 0.25);
  g.s0 = {3.0};
  g.tau = {1.5};
  g.delta = linspace_step(1.00, 5.00, 0.25);
  return g;
}

std::size_t GridSpec::size() const {
  return v0.size() * a_max.size() * b.size() * s0.size() * tau.size() *
         delta.size();
}

IdmParams GridSpec::at(std::size_t index) const {
  IdmParams p;
  p.delta = delta[index % delta.size()];
  index /= delta.size();
  p.tau = tau[index % tau.size()];
  index /= tau.size();
  p.s0 = s0[index % s0.size()];
  index /= s0.size();
  p.b = b[index % b.size()];
  index /= b.size();
  p.a_max = a_max[index % a_max.size()];
  index /= a_max.size();
  p.v0 = v0[index];
  return p;
}

void validate(const GridSpec& grid) {
  check_axis(grid.v0, "v0");
  check_axis(grid.a_max, "a_max");
  check_axis(grid.b, "b");
  check_axis(grid.s0, "s0");
  check_axis(grid.tau, "tau");
  check_axis(grid.delta, "delta");
}

double spacing_rmse(std::span<const double> predicted,
                    std::span<const double> actual) {
  if (predicted.size() != actual.size()) {
    throw ShapeError(fmt::format("spacing series lengths differ: {} vs {}",
                                 predicted.size(), actual.size()));
  }
  if (predicted.empty()) throw EmptyInputError("spacing series are empty");
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double e = predicted[i] - actual[i];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(predicted.size()));
}

std::vector<double> simulate_follower(const IdmParams& params,
                                      const TrajectorySeries& lead,
                                      double initial_speed,
                                      double initial_spacing,
                                      const SimConfig& cfg) {
  validate(cfg);
  validate(params);
  if (!(initial_spacing >= cfg.min_spacing_floor)) {
    throw ConfigError(fmt::format("initial spacing {} below the floor {}",
                                  initial_spacing, cfg.min_spacing_floor));
  }
  const double speeds[] = {lead.speeds.front(), initial_speed};
  const double spacings[] = {initial_spacing};
  PlatoonState state =
      make_platoon_state(lead.t0, 0.0, speeds, spacings, cfg.vehicle_length);
  const AccelerationLaw laws[] = {PlaybackLaw{lead, 0}, IdmLaw{params}};

  const std::size_t steps = cfg.steps();
  std::vector<double> out;
  out.reserve(steps + 1);
  out.push_back(state.spacings[0]);
  for (std::size_t k = 0; k < steps; ++k) {
    state = step(state, laws, cfg, k);
    out.push_back(state.spacings[0]);
  }
  return out;
}

CalibrationReport grid_search_calibrate(const GridSpec& grid,
                                        const TrajectorySeries& lead,
                                        const TrajectorySeries& follower,
                                        const SimConfig& cfg,
                                        const CalibrationOptions& options) {
  validate(grid);
  if (!follower.spacings) {
    throw ConfigError(fmt::format("vehicle {} has no spacing column",
                                  follower.vehicle_id));
  }
  if (std::abs(lead.dt - follower.dt) > 1e-12 * lead.dt ||
      lead.size() != follower.size() || lead.t0 != follower.t0) {
    throw ConfigError("leader and follower series are not time aligned");
  }
  if (follower.size() < 1) throw EmptyInputError("follower series is empty");

  SimConfig sim = cfg;
  sim.dt = follower.dt;
  sim.horizon = static_cast<double>(follower.size() - 1) * follower.dt;
  validate(sim);
  const std::vector<double>& observed = *follower.spacings;

  const std::size_t total = grid.size();
  std::vector<double> rmse(total);
  auto evaluate = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < total; i += stride) {
      const auto predicted = simulate_follower(
          grid.at(i), lead, follower.speeds.front(), observed.front(), sim);
      const double r = spacing_rmse(predicted, observed);
      rmse[i] = std::isfinite(r) ? r : std::numeric_limits<double>::infinity();
    }
  };

  unsigned threads = options.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));
  if (threads <= 1) {
    evaluate(0, 1);
  } else {
    std::vector<std::jthread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          evaluate(t, threads);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    pool.clear();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  // Reduce by flat index, which is lexicographic parameter order.
  const std::size_t keep = std::min(total, options.runner_ups + 1);
  std::vector<std::size_t> order(total);
  for (std::size_t i = 0; i < total; ++i) order[i] = i;
  std::partial_sort(order.begin(), order.begin() + static_cast<long>(keep),
                    order.end(), [&](std::size_t a, std::size_t b) {
                      if (rmse[a] != rmse[b]) return rmse[a] < rmse[b];
                      return a < b;
                    });

  CalibrationReport report;
  report.best_params = grid.at(order[0]);
  report.rmse = rmse[order[0]];
  report.evaluated_count = total;
  for (std::size_t i = 1; i < keep; ++i) {
    report.runner_ups.push_back({grid.at(order[i]), rmse[order[i]]});
  }
  return report;
}

}  // namespace sacc
