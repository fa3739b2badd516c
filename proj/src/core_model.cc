#include "sacc/core_model.h"

#include <charconv>
#include <cmath>
#include <fmt/format.h>

#include "sacc/errors.h"

namespace sacc {
namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

std::optional<double> parse_double(std::string_view text) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

}  // namespace

void validate(const IdmParams& p) {
  const struct {
    const char* name;
    double value;
  } fields[] = {{"v0", p.v0}, {"a_max", p.a_max}, {"b", p.b},
                {"s0", p.s0}, {"tau", p.tau},     {"delta", p.delta}};
  for (const auto& f : fields) {
    if (!positive_finite(f.value)) {
      throw ParameterError(
          fmt::format("IDM parameter {} must be positive, got {}", f.name,
                      f.value));
    }
  }
}

SvoAngle::SvoAngle(double radians) : phi_(radians) {
  if (!std::isfinite(radians) || radians < 0.0 || radians > kHalfPi) {
    throw ConfigError(
        fmt::format("SVO angle {} outside [0, pi/2]", radians));
  }
}

double SvoAngle::self_weight() const {
  if (phi_ == kHalfPi) return 0.0;
  return std::cos(phi_);
}

double SvoAngle::collective_weight() const {
  if (phi_ == kHalfPi) return 1.0;
  return std::sin(phi_);
}

SvoAngle parse_svo_angle(const std::string& raw) {
  std::string text;
  for (char c : raw) {
    if (c != ' ') text.push_back(c);
  }
  if (text.empty()) throw ConfigError("empty SVO angle");

  // [coef*]pi[/div]
  if (auto pos = text.find("pi"); pos != std::string::npos) {
    double coef = 1.0;
    double div = 1.0;
    if (pos > 0) {
      std::string_view head(text.data(), pos);
      if (head.back() == '*') head.remove_suffix(1);
      auto c = parse_double(head);
      if (!c) throw ConfigError("cannot parse SVO angle '" + raw + "'");
      coef = *c;
    }
    std::string_view tail(text.data() + pos + 2, text.size() - pos - 2);
    if (!tail.empty()) {
      if (tail.front() != '/') {
        throw ConfigError("cannot parse SVO angle '" + raw + "'");
      }
      auto d = parse_double(tail.substr(1));
      if (!d || *d == 0.0) {
        throw ConfigError("cannot parse SVO angle '" + raw + "'");
      }
      div = *d;
    }
    return SvoAngle(coef * std::numbers::pi / div);
  }
  auto value = parse_double(text);
  if (!value) throw ConfigError("cannot parse SVO angle '" + raw + "'");
  return SvoAngle(*value);
}

std::string format_svo_angle(SvoAngle phi) {
  const double r = phi.radians();
  if (r == 0.0) return "0";
  if (r == kHalfPi) return "pi/2";
  if (r == std::numbers::pi / 4.0) return "pi/4";
  return fmt::format("{:.6f}", r);
}

std::size_t SimConfig::steps() const {
  const double ratio = horizon / dt;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw ConfigError(fmt::format(
        "horizon {} is not a multiple of dt {}", horizon, dt));
  }
  return static_cast<std::size_t>(rounded);
}

void validate(const SimConfig& cfg) {
  if (!positive_finite(cfg.dt)) throw ConfigError("dt must be > 0");
  if (!std::isfinite(cfg.horizon) || cfg.horizon < 0.0) {
    throw ConfigError("horizon must be >= 0");
  }
  if (!positive_finite(cfg.vehicle_length)) {
    throw ConfigError("vehicle_length must be > 0");
  }
  if (!positive_finite(cfg.min_spacing_floor)) {
    throw ConfigError("min_spacing_floor must be > 0");
  }
  if (!std::isfinite(cfg.speed_floor) || cfg.speed_floor < 0.0) {
    throw ConfigError("speed_floor must be >= 0");
  }
  (void)cfg.steps();
}

ValidationResult validate_trajectory(const TrajectorySeries& series) {
  ValidationResult result;
  auto report = [&](std::string what, std::optional<std::size_t> index) {
    result.violations.push_back({std::move(what), index});
  };

  if (!std::isfinite(series.dt) || series.dt <= 0.0) report("dt > 0", {});
  if (!std::isfinite(series.t0)) report("t0 finite", {});
  if (series.speeds.size() < 2) report("length >= 2", {});
  if (series.spacings && series.spacings->size() != series.speeds.size()) {
    report("speeds and spacings have equal length", {});
  }

  for (std::size_t k = 0; k < series.speeds.size(); ++k) {
    if (!std::isfinite(series.speeds[k])) {
      report("all speeds finite", k);
      break;
    }
  }
  for (std::size_t k = 0; k < series.speeds.size(); ++k) {
    if (series.speeds[k] < 0.0) {
      report("all speeds >= 0", k);
      break;
    }
  }
  if (series.spacings) {
    const auto& s = *series.spacings;
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (!std::isfinite(s[k])) {
        report("all spacings finite", k);
        break;
      }
    }
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (s[k] <= 0.0) {
        report("all spacings > 0", k);
        break;
      }
    }
  }
  return result;
}

PlatoonState make_platoon_state(double time, double leader_position,
                                std::span<const double> speeds,
                                std::span<const double> spacings,
                                double vehicle_length) {
  if (speeds.empty() || spacings.size() + 1 != speeds.size()) {
    throw ShapeError(fmt::format(
        "platoon of {} speeds needs {} spacings, got {}", speeds.size(),
        speeds.empty() ? 0 : speeds.size() - 1, spacings.size()));
  }
  PlatoonState state;
  state.time = time;
  state.speeds.assign(speeds.begin(), speeds.end());
  state.spacings.assign(spacings.begin(), spacings.end());
  state.positions.resize(speeds.size());
  state.positions[0] = leader_position;
  for (std::size_t i = 1; i < speeds.size(); ++i) {
    state.positions[i] =
        state.positions[i - 1] - spacings[i - 1] - vehicle_length;
  }
  return state;
}

double kinematic_consistency_error(const PlatoonState& state,
                                   double vehicle_length) {
  double worst = 0.0;
  for (std::size_t i = 1; i < state.size(); ++i) {
    const double implied =
        state.positions[i - 1] - state.positions[i] - vehicle_length;
    worst = std::max(worst, std::abs(state.spacings[i - 1] - implied));
  }
  return worst;
}

}  // namespace sacc
