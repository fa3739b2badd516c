#pragma once

// Shared domain types for the platoon simulator: trajectories, platoon
// snapshots, IDM parameters, the social value orientation angle, and the
// simulation configuration.

#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sacc {

// Uniformly sampled speed (and spacing) history of one vehicle. The platoon
// leader has no predecessor, so its spacings are absent.
struct TrajectorySeries {
  int vehicle_id = 0;
  double dt = 0.1;
  double t0 = 0.0;
  std::vector<double> speeds;
  std::optional<std::vector<double>> spacings;

  std::size_t size() const { return speeds.size(); }
  double time_at(std::size_t k) const {
    return t0 + static_cast<double>(k) * dt;
  }
  bool operator==(const TrajectorySeries&) const = default;
};

// Snapshot of an n-vehicle platoon. Index 0 is the leader. positions are
// front bumpers and decrease along the platoon; spacings[i - 1] is the gap
// between vehicle i and the rear bumper of vehicle i - 1.
struct PlatoonState {
  double time = 0.0;
  std::vector<double> positions;
  std::vector<double> speeds;
  std::vector<double> spacings;

  std::size_t size() const { return speeds.size(); }
  double spacing_of(std::size_t vehicle) const {
    return spacings[vehicle - 1];
  }
  bool operator==(const PlatoonState&) const = default;
};

struct IdmParams {
  double v0 = 5.0;     // desired speed, m/s
  double a_max = 1.0;  // maximum acceleration, m/s^2
  double b = 1.5;      // comfortable deceleration, m/s^2
  double s0 = 3.0;     // minimum spacing, m
  double tau = 1.5;    // time gap, s
  double delta = 4.0;  // acceleration exponent

  bool operator==(const IdmParams&) const = default;
  auto operator<=>(const IdmParams&) const = default;
};

// Throws ParameterError unless all six values are finite and positive.
void validate(const IdmParams& params);

// Social value orientation angle in [0, pi/2]. 0 is egoistic, pi/4
// prosocial, pi/2 altruistic.
class SvoAngle {
 public:
  // Throws ConfigError outside [0, pi/2].
  explicit SvoAngle(double radians);

  static SvoAngle egoistic() { return SvoAngle(0.0); }
  static SvoAngle prosocial() { return SvoAngle(std::numbers::pi / 4.0); }
  static SvoAngle altruistic() { return SvoAngle(std::numbers::pi / 2.0); }

  double radians() const { return phi_; }
  // cos and sin with the two endpoints pinned to exact 0/1.
  double self_weight() const;
  double collective_weight() const;

  bool operator==(const SvoAngle&) const = default;
  auto operator<=>(const SvoAngle&) const = default;

 private:
  double phi_;
};

// Parses "0", "pi/4", "pi/2", "3*pi/8" or a plain radian value.
SvoAngle parse_svo_angle(const std::string& text);
std::string format_svo_angle(SvoAngle phi);

struct SimConfig {
  double dt = 0.1;
  double horizon = 120.0;
  double vehicle_length = 4.5;
  double min_spacing_floor = 0.1;
  double speed_floor = 0.0;

  // Number of Euler steps covering the horizon. Throws ConfigError when the
  // horizon is not an integer multiple of dt.
  std::size_t steps() const;
  bool operator==(const SimConfig&) const = default;
};

// Throws ConfigError when a field is out of range. A zero horizon is
// accepted and yields an empty rollout.
void validate(const SimConfig& cfg);

struct Violation {
  std::string invariant;
  std::optional<std::size_t> index;
};

struct ValidationResult {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

// Checks every TrajectorySeries invariant. Never throws; NaN and infinities
// are reported as violations.
ValidationResult validate_trajectory(const TrajectorySeries& series);

// Builds a state from the leader's position plus speeds and spacings;
// follower positions follow from the spacing convention.
PlatoonState make_platoon_state(double time, double leader_position,
                                std::span<const double> speeds,
                                std::span<const double> spacings,
                                double vehicle_length);

// max_i |s_i - (x_{i-1} - x_i - L)|.
double kinematic_consistency_error(const PlatoonState& state,
                                   double vehicle_length);

}  // namespace sacc
