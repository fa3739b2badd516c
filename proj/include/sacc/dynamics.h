#pragma once

// Deterministic platoon stepping with forward Euler updates. Every vehicle's
// acceleration is evaluated on the time-t state (synchronous update), then
// speeds and spacings advance:
//
//   v_i(t+dt) = max(0, v_i(t) + a_i(t) dt)
//   s_i(t+dt) = s_i(t) + (v_{i-1}(t) - v_i(t)) dt, floored at
//               min_spacing_floor
//
// When the spacing floor engages, the follower's new speed is also capped at
// its predecessor's new speed so that a vehicle can never drive through the
// one ahead of it.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "sacc/controller.h"
#include "sacc/core_model.h"

namespace sacc {

// s0 + v tau + v (v - v_lead) / (2 sqrt(a_max b)). No lower clamp.
double desired_spacing(const IdmParams& params, double v, double v_lead);

// a_max [1 - (v/v0)^delta - (s*/s)^2].
double idm_acceleration(const IdmParams& params, double v, double v_lead,
                        double s);

struct IdmPartials {
  double accel = 0.0;
  double d_speed = 0.0;
  double d_lead_speed = 0.0;
  double d_spacing = 0.0;
};

// Acceleration together with its partial derivatives.
IdmPartials idm_partials(const IdmParams& params, double v, double v_lead,
                         double s);

// Spacing at which idm_acceleration vanishes for v = v_lead.
double idm_equilibrium_spacing(const IdmParams& params, double v);

// Replays a recorded speed series; the vehicle's next speed is the next
// recorded sample. Step k reads samples offset + k and offset + k + 1.
struct PlaybackLaw {
  TrajectorySeries series;
  std::size_t offset = 0;
};

struct NeuralLaw {
  std::shared_ptr<const ControllerParams> params;
  SvoAngle phi = SvoAngle::egoistic();
};

struct IdmLaw {
  IdmParams params;
};

using AccelerationLaw = std::variant<PlaybackLaw, NeuralLaw, IdmLaw>;

// Per-vehicle record of which nonsmooth branches one step took.
struct StepFlags {
  std::vector<std::uint8_t> speed_floored;    // v + a dt fell below the floor
  std::vector<std::uint8_t> spacing_floored;  // spacing floor engaged
  std::vector<std::uint8_t> speed_capped;     // capped at predecessor speed
};

struct StepOutcome {
  PlatoonState next;
  std::vector<double> accelerations;
  StepFlags flags;
  bool collision = false;  // some pre-floor spacing was <= 0
};

// Advances history.back() by one step. `step_index` indexes playback laws;
// neural laws read their observation window from `history`.
StepOutcome step(std::span<const PlatoonState> history,
                 std::span<const AccelerationLaw> laws, const SimConfig& cfg,
                 std::size_t step_index);

// Single-state convenience form; neural laws see a window padded from this
// state alone.
PlatoonState step(const PlatoonState& state,
                  std::span<const AccelerationLaw> laws, const SimConfig& cfg,
                  std::size_t step_index = 0);

struct RolloutResult {
  std::vector<PlatoonState> states;                // steps + 1 entries
  std::vector<std::vector<double>> accelerations;  // [vehicle][step]
  std::vector<StepFlags> flags;                    // [step]
  bool collision = false;
  std::optional<double> first_collision_time;

  std::vector<double> speeds_of(std::size_t vehicle) const;
  std::vector<double> spacings_of(std::size_t vehicle) const;
};

// Applies step horizon/dt times. states[k].time = t0 + k dt.
RolloutResult rollout(const PlatoonState& initial,
                      std::span<const AccelerationLaw> laws,
                      const SimConfig& cfg);

}  // namespace sacc
