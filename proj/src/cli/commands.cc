#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "cli/files.h"
#include "sacc/calibration.h"
#include "sacc/controller_io.h"
#include "sacc/errors.h"
#include "sacc/ingest.h"
#include "sacc/metrics.h"

namespace sacc::cli {
namespace fs = std::filesystem;
namespace {

constexpr std::string_view kChangePrefix = "change_pct_";

ordered_json phis_to_json(std::span<const SvoAngle> phis) {
  ordered_json out = ordered_json::array();
  for (const auto& phi : phis) out.push_back(phi_to_json(phi));
  return out;
}

ordered_json grid_to_json(const GridSpec& g) {
  return {{"v0", g.v0},   {"a_max", g.a_max}, {"b", g.b},
          {"s0", g.s0},   {"tau", g.tau},     {"delta", g.delta}};
}

std::string optional_dt(const std::optional<double>& dt) {
  return dt ? format_double(*dt) : "recorded";
}

Scenario resolve_scenario(const fs::path& path, std::optional<double> dt,
                          std::uint64_t seed) {
  if (!path.empty()) return load_scenario(path, dt);
  ScenarioSpec spec;
  spec.seed = seed;
  if (dt) spec.dt = *dt;
  return sacc::gen_synthetic(spec).scenario;
}

std::vector<fs::path> scenario_inputs(const fs::path& path) {
  if (path.empty()) return {};
  const auto j = ordered_json::parse(read_text(path));
  return {path, path.parent_path() / j.at("trajectories").get<std::string>()};
}

std::string idm_row(const std::string& name, const IdmParams& p, double rmse) {
  return fmt::format("{:<8}{:>8.2f}{:>8.2f}{:>8.2f}{:>8.2f}{:>8.2f}{:>8.2f}{:>10.4f}\n",
                     name, p.v0, p.a_max, p.b, p.s0, p.tau, p.delta, rmse);
}

std::string idm_kv(const std::string& prefix, const IdmParams& p) {
  return fmt::format("{0}.v0 = {1}\n{0}.a_max = {2}\n{0}.b = {3}\n{0}.s0 = {4}\n"
                     "{0}.tau = {5}\n{0}.delta = {6}\n",
                     prefix, format_double(p.v0), format_double(p.a_max),
                     format_double(p.b), format_double(p.s0),
                     format_double(p.tau), format_double(p.delta));
}

std::string history_header(std::span<const SvoAngle> phis) {
  std::string h = "epoch,total,prediction,cost,smoothness,trend,trend_weight";
  for (const auto& phi : phis) h += ",u_self_" + phi_slug(phi);
  for (const auto& phi : phis) h += ",u_collective_" + phi_slug(phi);
  return h + "\n";
}

std::string history_row(int epoch, const LossBreakdown& l) {
  std::string row = fmt::format("{},{},{},{},{},{},{}", epoch, format_double(l.total),
                                format_double(l.prediction), format_double(l.cost),
                                format_double(l.smoothness), format_double(l.trend),
                                format_double(l.trend_weight));
  for (const auto& u : l.utilities) row += "," + format_double(u.u_self);
  for (const auto& u : l.utilities) row += "," + format_double(u.u_collective);
  return row + "\n";
}

std::string trajectory_csv(const RolloutResult& r, SvoAngle phi) {
  std::string out = "phi,time_s,vehicle_id,speed_mps,spacing_m,accel_mps2\n";
  const std::string label = format_svo_angle(phi);
  for (std::size_t i = 0; i < r.accelerations.size(); ++i) {
    for (std::size_t k = 0; k < r.states.size(); ++k) {
      const PlatoonState& s = r.states[k];
      out += fmt::format("{},{},{},{},{},{}\n", label, format_double(s.time), i + 1,
                         format_double(s.speeds[i]),
                         i > 0 ? format_double(s.spacings[i - 1]) : "",
                         k < r.accelerations[i].size()
                             ? format_double(r.accelerations[i][k])
                             : "");
    }
  }
  return out;
}

std::string percent_text(const std::optional<double>& p) {
  return p ? fmt::format("{:.2f}", *p) : "undefined";
}

std::string table_csv(const EvaluationTable& t, bool energy) {
  std::string out = "vehicle_id";
  for (const auto& phi : t.phis) out += ",value_" + phi_slug(phi);
  for (const auto& phi : t.phis) out += "," + std::string(kChangePrefix) + phi_slug(phi);
  out += "\n";
  for (std::size_t i = 0; i < t.cells.size(); ++i) {
    out += std::to_string(t.vehicle_ids[i]);
    for (const auto& c : t.cells[i]) {
      out += "," + format_double(energy ? c.energy : c.avg_speed);
    }
    const auto& change = energy ? t.energy_change[i] : t.speed_change[i];
    for (const auto& p : change) out += "," + percent_text(p);
    out += "\n";
  }
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_table(const fs::path& path) {
  if (!fs::exists(path)) {
    throw IoError(fmt::format("missing evaluation artifact {}", path.string()));
  }
  std::istringstream in(read_text(path));
  CsvTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  if (!std::getline(in, line)) throw FormatError(path.string() + " is empty");
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split(line));
    if (t.rows.back().size() != t.header.size()) {
      throw FormatError(fmt::format("{}: ragged row {}", path.string(), t.rows.size() + 1));
    }
  }
  return t;
}

}  // namespace

void gen_synthetic(const GenSyntheticOptions& options) {
  validate(options.spec);
  std::vector<fs::path> inputs;
  if (const auto* csv = std::get_if<CsvProfile>(&options.spec.leader)) {
    inputs.push_back(csv->path);
  }
  write_manifest(options.out, "gen-synthetic", spec_to_json(options.spec), inputs,
                 options.spec.seed, {"scenario.csv", "scenario.json"});

  const SyntheticScenario syn = sacc::gen_synthetic(options.spec);
  save_csv(options.out / "scenario.csv", syn.trajectories);
  ordered_json followers = ordered_json::array();
  for (const auto& p : options.spec.follower_params) followers.push_back(idm_to_json(p));
  const ordered_json scenario = {{"trajectories", "scenario.csv"},
                                 {"vehicle_length", options.spec.vehicle_length},
                                 {"min_spacing_floor", options.spec.min_spacing_floor},
                                 {"follower_params", followers},
                                 {"generator", spec_to_json(options.spec)}};
  write_text(options.out / "scenario.json", scenario.dump(2) + "\n");
}

void calibrate(const CalibrateOptions& options) {
  validate(options.grid);
  const ordered_json config = {{"data", options.data.string()},
                               {"dt", optional_dt(options.dt)},
                               {"grid", grid_to_json(options.grid)},
                               {"vehicles", options.vehicles},
                               {"vehicle_length", options.vehicle_length},
                               {"min_spacing_floor", options.min_spacing_floor},
                               {"runner_ups", options.runner_ups},
                               {"threads", options.threads}};
  write_manifest(options.out, "calibrate", config, {options.data}, 0,
                 {"calibration.txt", "calibration.kv"});

  const auto series = load_csv(options.data, CsvOptions{options.dt});
  if (series.size() < 2) throw ConfigError("calibration needs at least 2 vehicles");
  std::vector<int> targets = options.vehicles;
  if (targets.empty()) {
    for (std::size_t i = series.size() >= 3 ? 2 : 1; i < series.size(); ++i) {
      targets.push_back(series[i].vehicle_id);
    }
  }

  std::string table = fmt::format("{:<8}{:>8}{:>8}{:>8}{:>8}{:>8}{:>8}{:>10}\n", "vehicle",
                                  "v0", "a_max", "b", "s0", "tau", "delta", "rmse_m");
  std::string kv;
  for (int id : targets) {
    auto it = std::find_if(series.begin(), series.end(),
                           [id](const TrajectorySeries& s) { return s.vehicle_id == id; });
    if (it == series.end()) throw ConfigError(fmt::format("no vehicle {} in the data", id));
    if (it == series.begin()) {
      throw ConfigError(fmt::format("vehicle {} leads the platoon", id));
    }
    SimConfig sim;
    sim.dt = it->dt;
    sim.vehicle_length = options.vehicle_length;
    sim.min_spacing_floor = options.min_spacing_floor;
    const CalibrationReport r = grid_search_calibrate(
        options.grid, *(it - 1), *it, sim, {options.runner_ups, options.threads});

    const std::string name = fmt::format("v{}", id);
    table += idm_row(name, r.best_params, r.rmse);
    kv += idm_kv(name, r.best_params);
    kv += fmt::format("{}.rmse = {}\n{}.evaluated = {}\n", name, format_double(r.rmse),
                      name, r.evaluated_count);
    for (std::size_t k = 0; k < r.runner_ups.size(); ++k) {
      const std::string prefix = fmt::format("{}.runner_up.{}", name, k + 1);
      kv += idm_kv(prefix, r.runner_ups[k].params);
      kv += fmt::format("{}.rmse = {}\n", prefix, format_double(r.runner_ups[k].rmse));
    }
  }
  write_text(options.out / "calibration.txt", table);
  write_text(options.out / "calibration.kv", kv);
}

void train(const TrainOptions& options) {
  TrainConfig cfg = options.config;
  cfg.scenario = resolve_scenario(options.scenario, options.dt, cfg.seed);
  validate(cfg);
  validate(options.weights);

  ordered_json pairs = ordered_json::array();
  for (const auto& p : cfg.phi_pairs) {
    pairs.push_back({phi_to_json(p.lower), phi_to_json(p.upper)});
  }
  const ordered_json config = {
      {"scenario", options.scenario.empty() ? "reference" : options.scenario.string()},
      {"dt", optional_dt(options.dt)},
      {"epochs", cfg.epochs},
      {"learning_rate", cfg.learning_rate},
      {"optimizer", cfg.optimizer == OptimizerKind::kAdam ? "adam" : "gd"},
      {"phi_set", phis_to_json(cfg.phi_set)},
      {"phi_pairs", pairs},
      {"v_target", cfg.v_target},
      {"collective_all_followers", cfg.collective_all_followers},
      {"hidden_dim", cfg.shape.hidden_dim},
      {"seq_len", cfg.shape.seq_len},
      {"a_lim", cfg.shape.a_lim},
      {"alpha", options.weights.alpha},
      {"beta", options.weights.beta},
      {"gamma", options.weights.gamma},
      {"trend_full_at_epoch", options.weights.ramp.full_at_epoch},
      {"trend_form", options.weights.trend_form == TrendForm::kHinge ? "hinge" : "symmetric"},
      {"threads", cfg.threads}};
  write_manifest(options.out, "train", config, scenario_inputs(options.scenario), cfg.seed,
                 {"checkpoint.bin", "history.csv"});

  const TrainResult result = sacc::train(cfg, options.weights, [&](int epoch, const LossBreakdown& l) {
    if (epoch % 20 == 0) fmt::print("epoch {:4d}  total {:.6g}\n", epoch, l.total);
  });
  fmt::print("final      total {:.6g}\n", result.final_loss.total);

  save_controller(options.out / "checkpoint.bin", result.params);
  std::string history = history_header(cfg.phi_set);
  for (std::size_t e = 0; e < result.history.size(); ++e) {
    history += history_row(static_cast<int>(e), result.history[e]);
  }
  history += history_row(cfg.epochs, result.final_loss);
  write_text(options.out / "history.csv", history);
}

void evaluate(const EvaluateOptions& options) {
  if (options.phis.empty()) throw ConfigError("evaluate needs at least one phi");
  if (std::find(options.phis.begin(), options.phis.end(), SvoAngle::egoistic()) ==
      options.phis.end()) {
    throw ConfigError("phi list must contain the baseline phi = 0");
  }
  std::vector<std::string> outputs;
  for (const auto& phi : options.phis) {
    outputs.push_back(fmt::format("trajectories_phi_{}.csv", phi_slug(phi)));
  }
  for (const char* name : {"energy_bars.csv", "table_energy.csv", "table_speed.csv",
                           "tables.txt"}) {
    outputs.emplace_back(name);
  }
  std::vector<fs::path> inputs = {options.checkpoint};
  for (const auto& p : scenario_inputs(options.scenario)) inputs.push_back(p);
  const ordered_json config = {
      {"checkpoint", options.checkpoint.string()},
      {"scenario", options.scenario.empty() ? "reference" : options.scenario.string()},
      {"dt", optional_dt(options.dt)},
      {"phi", phis_to_json(options.phis)}};
  write_manifest(options.out, "evaluate", config, inputs, options.seed, outputs);

  const ControllerParams params = load_controller(options.checkpoint);
  const Scenario scenario = resolve_scenario(options.scenario, options.dt, options.seed);
  std::vector<PhiRollout> rollouts;
  for (const auto& phi : options.phis) {
    rollouts.push_back({phi, rollout_controller(params, scenario, phi)});
    write_text(options.out / fmt::format("trajectories_phi_{}.csv", phi_slug(phi)),
               trajectory_csv(rollouts.back().rollout, phi));
  }
  const EvaluationTable table = build_table(rollouts, SvoAngle::egoistic(), scenario.sim.dt);

  std::string bars = "phi,vehicle_id,energy\n";
  for (std::size_t j = 0; j < table.phis.size(); ++j) {
    for (std::size_t i = 0; i < table.cells.size(); ++i) {
      bars += fmt::format("{},{},{}\n", format_svo_angle(table.phis[j]),
                          table.vehicle_ids[i], format_double(table.cells[i][j].energy));
    }
  }
  write_text(options.out / "energy_bars.csv", bars);
  write_text(options.out / "table_energy.csv", table_csv(table, true));
  write_text(options.out / "table_speed.csv", table_csv(table, false));
  write_text(options.out / "tables.txt", format_table(table));
  for (const auto& w : table.warnings) fmt::print(stderr, "warning: {}\n", w);
}

void report(const ReportOptions& options) {
  const fs::path out = options.out.empty() ? options.dir / "report" : options.out;
  const std::vector<fs::path> needed = {options.dir / "tables.txt",
                                        options.dir / "table_energy.csv",
                                        options.dir / "table_speed.csv"};
  for (const auto& p : needed) {
    if (!fs::exists(p)) {
      throw IoError(fmt::format("missing evaluation artifact {}", p.string()));
    }
  }
  write_manifest(out, "report", {{"dir", options.dir.string()}}, needed, 0,
                 {"report.txt"});

  const CsvTable energy = read_table(options.dir / "table_energy.csv");
  const CsvTable speed = read_table(options.dir / "table_speed.csv");
  const std::size_t n_phi = (speed.header.size() - 1) / 2;
  if (n_phi == 0 || speed.header.size() != 2 * n_phi + 1 ||
      energy.header != speed.header || energy.rows.size() != speed.rows.size()) {
    throw FormatError("energy and speed tables disagree in layout");
  }

  std::string text = "Platoon evaluation report\n\n";
  text += read_text(options.dir / "tables.txt");
  text += "\nChanges relative to phi=0\n";
  for (std::size_t r = 0; r < speed.rows.size(); ++r) {
    for (std::size_t j = 0; j < n_phi; ++j) {
      std::string label = speed.header[1 + n_phi + j].substr(kChangePrefix.size());
      if (label == "0") continue;
      // Undo the file-name slug for multiples of pi.
      if (label.find("pi") != std::string::npos) std::replace(label.begin(), label.end(), '_', '/');
      text += fmt::format("  v{} phi={}: average speed {}%, energy {}%\n", speed.rows[r][0],
                          label, speed.rows[r][1 + n_phi + j],
                          energy.rows[r][1 + n_phi + j]);
    }
  }
  write_text(out / "report.txt", text);
  fmt::print("{}", text);
}

}  // namespace sacc::cli
