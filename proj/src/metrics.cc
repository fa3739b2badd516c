#include "sacc/metrics.h"

#include <cmath>

#include <fmt/format.h>

#include "sacc/errors.h"
#include "sacc/losses.h"

namespace sacc {

double energy_indicator(std::span<const double> accelerations, double dt) {
  return u_self(accelerations, dt);
}

double average_speed(std::span<const double> speeds) {
  if (speeds.empty()) throw EmptyInputError("average of an empty speed series");
  double sum = 0.0;
  for (double v : speeds) sum += v;
  return sum / static_cast<double>(speeds.size());
}

double percent_change(double baseline, double value) {
  if (baseline == 0.0) {
    throw UndefinedBaselineError("percentage change against a zero baseline");
  }
  return 100.0 * (value - baseline) / baseline;
}

EvaluationTable build_table(std::span<const PhiRollout> rollouts,
                            SvoAngle baseline_phi, double dt) {
  if (rollouts.empty()) throw EmptyInputError("no rollouts to tabulate");
  EvaluationTable table;
  bool found = false;
  for (std::size_t j = 0; j < rollouts.size(); ++j) {
    table.phis.push_back(rollouts[j].phi);
    if (rollouts[j].phi == baseline_phi) {
      table.baseline = j;
      found = true;
    }
  }
  if (!found) {
    throw ConfigError(fmt::format("baseline phi {} has no rollout",
                                  format_svo_angle(baseline_phi)));
  }

  const RolloutResult& first = rollouts.front().rollout;
  const std::size_t vehicles = first.accelerations.size();
  for (const auto& r : rollouts) {
    if (r.rollout.accelerations.size() != vehicles ||
        r.rollout.states.size() != first.states.size()) {
      throw ShapeError("rollouts differ in platoon size or horizon");
    }
  }

  table.cells.assign(vehicles, std::vector<MetricCell>(rollouts.size()));
  table.energy_change.assign(vehicles,
                             std::vector<std::optional<double>>(rollouts.size()));
  table.speed_change = table.energy_change;
  for (std::size_t i = 0; i < vehicles; ++i) {
    table.vehicle_ids.push_back(static_cast<int>(i + 1));
    for (std::size_t j = 0; j < rollouts.size(); ++j) {
      const RolloutResult& r = rollouts[j].rollout;
      table.cells[i][j] = {energy_indicator(r.accelerations[i], dt),
                           average_speed(r.speeds_of(i))};
    }
    const MetricCell& base = table.cells[i][table.baseline];
    if (std::abs(base.energy) < kSmallBaseline) {
      table.warnings.push_back(fmt::format(
          "vehicle {}: baseline energy {:.3g} is near zero, energy "
          "percentages are unstable",
          i + 1, base.energy));
    }
    if (std::abs(base.avg_speed) < kSmallBaseline) {
      table.warnings.push_back(fmt::format(
          "vehicle {}: baseline average speed {:.3g} is near zero, speed "
          "percentages are unstable",
          i + 1, base.avg_speed));
    }
    for (std::size_t j = 0; j < rollouts.size(); ++j) {
      const MetricCell& c = table.cells[i][j];
      if (base.energy != 0.0) {
        table.energy_change[i][j] = percent_change(base.energy, c.energy);
      }
      if (base.avg_speed != 0.0) {
        table.speed_change[i][j] = percent_change(base.avg_speed, c.avg_speed);
      }
    }
  }
  return table;
}

namespace {

std::string header(const EvaluationTable& table, const char* title) {
  std::string out = fmt::format("{}\n{:<8}", title, "vehicle");
  for (const auto& phi : table.phis) {
    out += fmt::format("{:>14}", "phi=" + format_svo_angle(phi));
  }
  return out + "\n";
}

std::string percent_cell(const std::optional<double>& p) {
  return p ? fmt::format("{:>14.2f}", *p) : fmt::format("{:>14}", "undefined");
}

}  // namespace

std::string format_table(const EvaluationTable& table) {
  std::string out = header(table, "Energy indicator");
  for (std::size_t i = 0; i < table.cells.size(); ++i) {
    out += fmt::format("v{:<7}", table.vehicle_ids[i]);
    for (const auto& c : table.cells[i]) out += fmt::format("{:>14.4f}", c.energy);
    out += "\n";
  }
  out += "\n" + header(table, "Average speed (m/s)");
  for (std::size_t i = 0; i < table.cells.size(); ++i) {
    out += fmt::format("v{:<7}", table.vehicle_ids[i]);
    for (const auto& c : table.cells[i]) {
      out += fmt::format("{:>14.4f}", c.avg_speed);
    }
    out += "\n";
  }
  const std::string base = format_svo_angle(table.phis[table.baseline]);
  out += "\n" + header(table, fmt::format("Energy change vs phi={} (%)", base).c_str());
  for (std::size_t i = 0; i < table.cells.size(); ++i) {
    out += fmt::format("v{:<7}", table.vehicle_ids[i]);
    for (const auto& p : table.energy_change[i]) out += percent_cell(p);
    out += "\n";
  }
  out += "\n" + header(table, fmt::format("Speed change vs phi={} (%)", base).c_str());
  for (std::size_t i = 0; i < table.cells.size(); ++i) {
    out += fmt::format("v{:<7}", table.vehicle_ids[i]);
    for (const auto& p : table.speed_change[i]) out += percent_cell(p);
    out += "\n";
  }
  for (const auto& w : table.warnings) out += "warning: " + w + "\n";
  return out;
}

}  // namespace sacc
