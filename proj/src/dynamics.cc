#include "sacc/dynamics.h"

#include <cmath>

#include <fmt/format.h>

#include "sacc/errors.h"

namespace sacc {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::size_t playback_index(const PlaybackLaw& law, std::size_t step_index,
                           const SimConfig& cfg) {
  if (std::abs(law.series.dt - cfg.dt) > 1e-12 * cfg.dt) {
    throw ConfigError(fmt::format(
        "playback series dt {} differs from simulation dt {}", law.series.dt,
        cfg.dt));
  }
  const std::size_t idx = law.offset + step_index;
  if (idx + 1 >= law.series.size()) {
    throw PlaybackExhaustedError(fmt::format(
        "playback series of vehicle {} has {} samples, step {} needs {}",
        law.series.vehicle_id, law.series.size(), step_index, idx + 2));
  }
  return idx;
}

}  // namespace

double desired_spacing(const IdmParams& p, double v, double v_lead) {
  validate(p);
  return p.s0 + v * p.tau + v * (v - v_lead) / (2.0 * std::sqrt(p.a_max * p.b));
}

double idm_acceleration(const IdmParams& p, double v, double v_lead,
                        double s) {
  const double s_star = desired_spacing(p, v, v_lead);
  const double ratio = s_star / s;
  return p.a_max * (1.0 - std::pow(v / p.v0, p.delta) - ratio * ratio);
}

IdmPartials idm_partials(const IdmParams& p, double v, double v_lead,
                         double s) {
  const double s_star = desired_spacing(p, v, v_lead);
  const double root = 2.0 * std::sqrt(p.a_max * p.b);
  const double ds_dv = p.tau + (2.0 * v - v_lead) / root;
  const double ds_dlead = -v / root;
  const double ratio = s_star / s;
  // d/dv (v/v0)^delta; the v = 0 point takes the zero subgradient.
  const double free_term =
      v > 0.0 ? p.delta * std::pow(v / p.v0, p.delta - 1.0) / p.v0 : 0.0;

  IdmPartials out;
  out.accel = p.a_max * (1.0 - std::pow(v / p.v0, p.delta) - ratio * ratio);
  out.d_speed = p.a_max * (-free_term - 2.0 * ratio / s * ds_dv);
  out.d_lead_speed = p.a_max * (-2.0 * ratio / s * ds_dlead);
  out.d_spacing = p.a_max * 2.0 * ratio * ratio / s;
  return out;
}

double idm_equilibrium_spacing(const IdmParams& p, double v) {
  validate(p);
  const double free = 1.0 - std::pow(v / p.v0, p.delta);
  if (free <= 0.0) {
    throw ConfigError(fmt::format(
        "no finite equilibrium spacing at v = {} >= v0 = {}", v, p.v0));
  }
  return (p.s0 + v * p.tau) / std::sqrt(free);
}

StepOutcome step(std::span<const PlatoonState> history,
                 std::span<const AccelerationLaw> laws, const SimConfig& cfg,
                 std::size_t step_index) {
  if (history.empty()) throw ShapeError("step needs a current state");
  const PlatoonState& state = history.back();
  const std::size_t n = state.size();
  if (laws.size() != n) {
    throw ShapeError(fmt::format("{} vehicles but {} acceleration laws", n,
                                 laws.size()));
  }
  if (n == 0 || state.spacings.size() + 1 != n || state.positions.size() != n) {
    throw ShapeError("malformed platoon state");
  }
  if (!std::holds_alternative<PlaybackLaw>(laws[0])) {
    throw ConfigError("the platoon leader must follow a playback law");
  }

  StepOutcome out;
  out.accelerations.resize(n);
  out.flags.speed_floored.assign(n, 0);
  out.flags.spacing_floored.assign(n, 0);
  out.flags.speed_capped.assign(n, 0);
  PlatoonState& next = out.next;
  next.time = state.time + cfg.dt;
  next.speeds.resize(n);
  next.spacings.resize(n - 1);
  next.positions.resize(n);

  std::vector<std::uint8_t> is_playback(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::visit(
        Overloaded{
            [&](const PlaybackLaw& law) {
              const std::size_t idx = playback_index(law, step_index, cfg);
              const double now = law.series.speeds[idx];
              const double later = law.series.speeds[idx + 1];
              out.accelerations[i] = (later - now) / cfg.dt;
              next.speeds[i] = later;
              is_playback[i] = 1;
            },
            [&](const IdmLaw& law) {
              out.accelerations[i] = idm_acceleration(
                  law.params, state.speeds[i], state.speeds[i - 1],
                  state.spacing_of(i));
            },
            [&](const NeuralLaw& law) {
              const ObservationWindow window =
                  make_window(history, i, *law.params);
              out.accelerations[i] =
                  predict_accel(*law.params, window, law.phi);
            }},
        laws[i]);
    if (!is_playback[i]) {
      const double v = state.speeds[i] + out.accelerations[i] * cfg.dt;
      if (v < cfg.speed_floor) {
        next.speeds[i] = cfg.speed_floor;
        out.flags.speed_floored[i] = 1;
      } else {
        next.speeds[i] = v;
      }
    }
  }

  for (std::size_t i = 1; i < n; ++i) {
    const double pre = state.spacing_of(i) +
                       (state.speeds[i - 1] - state.speeds[i]) * cfg.dt;
    if (pre < cfg.min_spacing_floor) {
      next.spacings[i - 1] = cfg.min_spacing_floor;
      out.flags.spacing_floored[i] = 1;
      if (pre <= 0.0) out.collision = true;
      if (!is_playback[i] && next.speeds[i] > next.speeds[i - 1]) {
        next.speeds[i] = next.speeds[i - 1];
        out.flags.speed_capped[i] = 1;
      }
    } else {
      next.spacings[i - 1] = pre;
    }
  }

  next.positions[0] = state.positions[0] + state.speeds[0] * cfg.dt;
  for (std::size_t i = 1; i < n; ++i) {
    next.positions[i] =
        next.positions[i - 1] - next.spacings[i - 1] - cfg.vehicle_length;
  }
  return out;
}

PlatoonState step(const PlatoonState& state,
                  std::span<const AccelerationLaw> laws, const SimConfig& cfg,
                  std::size_t step_index) {
  return step(std::span<const PlatoonState>(&state, 1), laws, cfg, step_index)
      .next;
}

std::vector<double> RolloutResult::speeds_of(std::size_t vehicle) const {
  std::vector<double> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(s.speeds[vehicle]);
  return out;
}

std::vector<double> RolloutResult::spacings_of(std::size_t vehicle) const {
  std::vector<double> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(s.spacing_of(vehicle));
  return out;
}

RolloutResult rollout(const PlatoonState& initial,
                      std::span<const AccelerationLaw> laws,
                      const SimConfig& cfg) {
  validate(cfg);
  const std::size_t steps = cfg.steps();
  const std::size_t n = initial.size();
  for (double v : initial.speeds) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ConfigError("initial speeds must be finite and >= 0");
    }
  }

  RolloutResult result;
  result.states.reserve(steps + 1);
  result.states.push_back(initial);
  result.accelerations.assign(n, std::vector<double>(steps));
  result.flags.reserve(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    StepOutcome out = step(result.states, laws, cfg, k);
    out.next.time = initial.time + static_cast<double>(k + 1) * cfg.dt;
    for (std::size_t i = 0; i < n; ++i) {
      result.accelerations[i][k] = out.accelerations[i];
    }
    if (out.collision && !result.collision) {
      result.collision = true;
      result.first_collision_time = out.next.time;
    }
    result.flags.push_back(std::move(out.flags));
    result.states.push_back(std::move(out.next));
  }
  return result;
}

}  // namespace sacc
