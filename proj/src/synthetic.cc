#include "sacc/synthetic.h"

#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "sacc/errors.h"
#include "sacc/ingest.h"

namespace sacc {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::vector<double> leader_speeds(const ScenarioSpec& spec, std::size_t count) {
  std::vector<double> v(count);
  std::visit(
      Overloaded{
          [&](const SinusoidProfile& p) {
            const double w = 2.0 * std::numbers::pi / p.period;
            for (std::size_t k = 0; k < count; ++k) {
              const double t = static_cast<double>(k) * spec.dt;
              v[k] = std::max(0.0, p.mean - p.amplitude * std::cos(w * t + p.phase));
            }
          },
          [&](const PiecewiseProfile& p) {
            for (std::size_t k = 0; k < count; ++k) {
              const double t = static_cast<double>(k) * spec.dt;
              double start = 0.0;
              v[k] = p.segments.back().speed;
              for (const auto& seg : p.segments) {
                if (t < start + seg.duration) {
                  v[k] = seg.speed;
                  break;
                }
                start += seg.duration;
              }
            }
          },
          [&](const CsvProfile& p) {
            const auto all = load_csv(p.path, CsvOptions{spec.dt});
            const TrajectorySeries* match = nullptr;
            for (const auto& s : all) {
              if (s.vehicle_id == p.vehicle_id) match = &s;
            }
            if (!match) {
              throw ConfigError(fmt::format("{} has no vehicle {}",
                                            p.path.string(), p.vehicle_id));
            }
            if (match->size() < count) {
              throw ConfigError(fmt::format(
                  "leader recording covers {} samples, duration needs {}",
                  match->size(), count));
            }
            std::copy_n(match->speeds.begin(), count, v.begin());
          }},
      spec.leader);

  if (spec.leader_noise_std > 0.0) {
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, spec.leader_noise_std);
    for (double& x : v) x = std::max(0.0, x + noise(rng));
  }
  return v;
}

}  // namespace

void validate(const ScenarioSpec& spec) {
  if (spec.n_vehicles < 2) throw ConfigError("n_vehicles must be >= 2");
  const auto n = static_cast<std::size_t>(spec.n_vehicles);
  if (!(spec.duration > 0.0) || !std::isfinite(spec.duration)) {
    throw ConfigError("duration must be > 0");
  }
  if (!(spec.dt > 0.0) || !std::isfinite(spec.dt)) {
    throw ConfigError("dt must be > 0");
  }
  SimConfig sim{spec.dt, spec.duration, spec.vehicle_length,
                spec.min_spacing_floor, 0.0};
  validate(sim);
  if (spec.initial_spacings.size() != n - 1) {
    throw ConfigError(fmt::format("{} vehicles need {} initial spacings, got {}",
                                  n, n - 1, spec.initial_spacings.size()));
  }
  for (double s : spec.initial_spacings) {
    if (!(s >= spec.min_spacing_floor) || !std::isfinite(s)) {
      throw ConfigError(fmt::format(
          "initial spacing {} below the floor {}", s, spec.min_spacing_floor));
    }
  }
  if (spec.follower_params.size() != n - 2) {
    throw ConfigError(fmt::format("{} vehicles need {} follower parameter sets, got {}",
                                  n, n - 2, spec.follower_params.size()));
  }
  try {
    validate(spec.av_reference);
    for (const auto& p : spec.follower_params) validate(p);
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  if (!(spec.leader_noise_std >= 0.0)) {
    throw ConfigError("leader_noise_std must be >= 0");
  }
  std::visit(Overloaded{
                 [](const SinusoidProfile& p) {
                   if (!(p.mean >= 0.0) || !(p.amplitude >= 0.0) ||
                       p.amplitude > p.mean || !(p.period > 0.0) ||
                       !std::isfinite(p.phase)) {
                     throw ConfigError(
                         "sinusoid needs 0 <= amplitude <= mean and period > 0");
                   }
                 },
                 [](const PiecewiseProfile& p) {
                   if (p.segments.empty()) {
                     throw ConfigError("piecewise profile needs a segment");
                   }
                   for (const auto& s : p.segments) {
                     if (!(s.duration > 0.0) || !(s.speed >= 0.0)) {
                       throw ConfigError(
                           "piecewise segments need duration > 0, speed >= 0");
                     }
                   }
                 },
                 [](const CsvProfile&) {}},
             spec.leader);
}

SyntheticScenario gen_synthetic(const ScenarioSpec& spec) {
  validate(spec);
  const auto n = static_cast<std::size_t>(spec.n_vehicles);
  SimConfig sim{spec.dt, spec.duration, spec.vehicle_length,
                spec.min_spacing_floor, 0.0};
  const std::size_t steps = sim.steps();

  TrajectorySeries leader;
  leader.vehicle_id = 1;
  leader.dt = spec.dt;
  leader.t0 = 0.0;
  leader.speeds = leader_speeds(spec, steps + 1);

  const std::vector<double> speeds(n, leader.speeds.front());
  const PlatoonState initial = make_platoon_state(
      0.0, 0.0, speeds, spec.initial_spacings, spec.vehicle_length);

  std::vector<AccelerationLaw> laws;
  laws.emplace_back(PlaybackLaw{leader, 0});
  laws.emplace_back(IdmLaw{spec.av_reference});
  for (const auto& p : spec.follower_params) laws.emplace_back(IdmLaw{p});
  const RolloutResult ref = rollout(initial, laws, sim);

  SyntheticScenario out;
  for (std::size_t i = 0; i < n; ++i) {
    TrajectorySeries s;
    s.vehicle_id = static_cast<int>(i + 1);
    s.dt = spec.dt;
    s.t0 = 0.0;
    s.speeds = ref.speeds_of(i);
    if (i > 0) s.spacings = ref.spacings_of(i);
    out.trajectories.push_back(std::move(s));
  }

  Scenario& sc = out.scenario;
  sc.leader = out.trajectories[0];
  sc.av_reference = out.trajectories[1];
  sc.followers = spec.follower_params;
  sc.initial = initial;
  sc.sim = sim;
  sc.a_true = forward_difference_accelerations(sc.av_reference, steps);
  return out;
}

Scenario scenario_from_trajectories(std::span<const TrajectorySeries> series,
                                    std::span<const IdmParams> followers,
                                    double vehicle_length,
                                    double min_spacing_floor) {
  if (series.size() < 2) throw ConfigError("scenario needs >= 2 vehicles");
  if (followers.size() + 2 != series.size()) {
    throw ConfigError(fmt::format("{} trajectories need {} follower parameter sets, got {}",
                                  series.size(), series.size() - 2,
                                  followers.size()));
  }
  std::size_t length = series.front().size();
  for (const auto& s : series) {
    if (std::abs(s.dt - series.front().dt) > 1e-12 * s.dt ||
        s.t0 != series.front().t0) {
      throw ConfigError("trajectories are not time aligned");
    }
    length = std::min(length, s.size());
  }
  for (std::size_t i = 1; i < series.size(); ++i) {
    if (!series[i].spacings) {
      throw ConfigError(fmt::format("vehicle {} has no spacing column",
                                    series[i].vehicle_id));
    }
  }
  if (length < 3) throw ConfigError("trajectories too short for a scenario");

  Scenario sc;
  const double dt = series.front().dt;
  const std::size_t steps = length - 1;
  sc.sim = SimConfig{dt, static_cast<double>(steps) * dt, vehicle_length,
                     min_spacing_floor, 0.0};
  sc.leader = series[0];
  sc.av_reference = series[1];
  sc.followers.assign(followers.begin(), followers.end());
  std::vector<double> speeds, spacings;
  for (std::size_t i = 0; i < series.size(); ++i) {
    speeds.push_back(series[i].speeds.front());
    if (i > 0) spacings.push_back(series[i].spacings->front());
  }
  sc.initial = make_platoon_state(series[0].t0, 0.0, speeds, spacings,
                                  vehicle_length);
  sc.a_true = forward_difference_accelerations(sc.av_reference, steps);
  validate(sc);
  return sc;
}

}  // namespace sacc
