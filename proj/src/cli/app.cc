#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "sacc/cli.h"
#include "sacc/errors.h"

namespace sacc::cli {
namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& text) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !std::isfinite(value)) {
    throw ConfigError(fmt::format("not a number: '{}'", text));
  }
  return value;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(to_double(item));
  return out;
}

// "lo:hi:step" or "x,y,z".
std::vector<double> parse_axis(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() == 3) {
    return linspace_step(to_double(parts[0]), to_double(parts[1]),
                         to_double(parts[2]));
  }
  return parse_list(text);
}

// "v0,a_max,b,s0,tau,delta".
IdmParams parse_idm(const std::string& text) {
  const auto v = parse_list(text);
  if (v.size() != 6) {
    throw ConfigError(fmt::format("IDM parameters need 6 values, got '{}'", text));
  }
  return IdmParams{v[0], v[1], v[2], v[3], v[4], v[5]};
}

std::vector<SvoAngle> parse_phis(const std::string& text) {
  std::vector<SvoAngle> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_svo_angle(item));
  return out;
}

struct Shared {
  std::optional<double> dt;
  std::uint64_t seed = 7;
  std::string out;
};

void add_shared(CLI::App* cmd, Shared& shared, const std::string& default_out) {
  shared.out = default_out;
  cmd->add_option("--dt", shared.dt, "Sample interval in seconds");
  cmd->add_option("--seed", shared.seed, "Seed for every random draw")
      ->capture_default_str();
  cmd->add_option("--out", shared.out, "Output directory")->capture_default_str();
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Socially weighted adaptive cruise control experiments"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  // gen-synthetic
  Shared gen_shared;
  ScenarioSpec spec;
  std::string leader_kind = "sinusoid", segments, leader_csv, spacings, av_params;
  std::vector<std::string> follower_params;
  SinusoidProfile sinusoid;
  int leader_id = 1;
  auto* gen = app.add_subcommand("gen-synthetic", "Write a synthetic platoon scenario");
  add_shared(gen, gen_shared, "scenario");
  gen->add_option("--n-vehicles", spec.n_vehicles)->capture_default_str();
  gen->add_option("--leader", leader_kind, "sinusoid, piecewise or csv")
      ->check(CLI::IsMember({"sinusoid", "piecewise", "csv"}))
      ->capture_default_str();
  gen->add_option("--mean", sinusoid.mean)->capture_default_str();
  gen->add_option("--amplitude", sinusoid.amplitude)->capture_default_str();
  gen->add_option("--period", sinusoid.period)->capture_default_str();
  gen->add_option("--phase", sinusoid.phase)->capture_default_str();
  gen->add_option("--segments", segments, "Piecewise leader as duration:speed,...");
  gen->add_option("--leader-csv", leader_csv, "Trajectory CSV holding the leader");
  gen->add_option("--leader-id", leader_id)->capture_default_str();
  gen->add_option("--spacings", spacings, "Initial gaps, comma separated");
  gen->add_option("--av-params", av_params, "Reference AV driver v0,a_max,b,s0,tau,delta");
  gen->add_option("--follower-params", follower_params,
                  "One follower v0,a_max,b,s0,tau,delta per use");
  gen->add_option("--duration", spec.duration)->capture_default_str();
  gen->add_option("--vehicle-length", spec.vehicle_length)->capture_default_str();
  gen->add_option("--floor", spec.min_spacing_floor)->capture_default_str();
  gen->add_option("--noise", spec.leader_noise_std, "Leader speed jitter std")
      ->capture_default_str();

  // calibrate
  Shared cal_shared;
  CalibrateOptions cal;
  std::string data;
  std::string v0_axis, a_axis, b_axis, s0_axis, tau_axis, delta_axis;
  auto* calc = app.add_subcommand("calibrate", "Grid-search IDM parameters per follower");
  add_shared(calc, cal_shared, "calibration");
  calc->add_option("--data", data, "Trajectory CSV")->required();
  calc->add_option("--vehicles", cal.vehicles, "Vehicle ids to calibrate")->delimiter(',');
  calc->add_option("--v0", v0_axis, "Axis as lo:hi:step or a comma list");
  calc->add_option("--a-max", a_axis);
  calc->add_option("--b", b_axis);
  calc->add_option("--s0", s0_axis);
  calc->add_option("--tau", tau_axis);
  calc->add_option("--delta", delta_axis);
  calc->add_option("--vehicle-length", cal.vehicle_length)->capture_default_str();
  calc->add_option("--floor", cal.min_spacing_floor)->capture_default_str();
  calc->add_option("--top", cal.runner_ups, "Runner-ups to report")->capture_default_str();
  calc->add_option("--threads", cal.threads, "0 uses every core")->capture_default_str();

  // train
  Shared train_shared;
  TrainOptions tr;
  std::string scenario_path, phis_text, trend = "hinge", optimizer = "adam";
  std::optional<int> ramp_epochs;
  auto* trc = app.add_subcommand("train", "Train the AV controller");
  add_shared(trc, train_shared, "train");
  trc->add_option("--scenario", scenario_path, "scenario.json; default is the reference scenario");
  trc->add_option("--epochs", tr.config.epochs)->capture_default_str();
  trc->add_option("--lr", tr.config.learning_rate)->capture_default_str();
  trc->add_option("--alpha", tr.weights.alpha)->capture_default_str();
  trc->add_option("--beta", tr.weights.beta)->capture_default_str();
  trc->add_option("--gamma", tr.weights.gamma)->capture_default_str();
  trc->add_option("--ramp-epochs", ramp_epochs, "Epoch at which the trend term is fully on");
  trc->add_option("--trend", trend)->check(CLI::IsMember({"hinge", "symmetric"}))
      ->capture_default_str();
  trc->add_option("--optimizer", optimizer)->check(CLI::IsMember({"adam", "gd"}))
      ->capture_default_str();
  trc->add_option("--phi", phis_text, "Comma separated angles, e.g. 0,pi/4,pi/2");
  trc->add_option("--v-target", tr.config.v_target)->capture_default_str();
  trc->add_option("--hidden", tr.config.shape.hidden_dim)->capture_default_str();
  trc->add_option("--seq-len", tr.config.shape.seq_len)->capture_default_str();
  trc->add_option("--a-lim", tr.config.shape.a_lim)->capture_default_str();
  trc->add_flag("--collective-all", tr.config.collective_all_followers,
                "Collective utility over every follower");
  trc->add_option("--threads", tr.config.threads)->capture_default_str();

  // evaluate
  Shared eval_shared;
  EvaluateOptions ev;
  std::string checkpoint, eval_scenario, eval_phis;
  auto* evc = app.add_subcommand("evaluate", "Roll out a checkpoint across phi settings");
  add_shared(evc, eval_shared, "evaluation");
  evc->add_option("--checkpoint", checkpoint)->required();
  evc->add_option("--scenario", eval_scenario, "scenario.json; default is the reference scenario");
  evc->add_option("--phi", eval_phis, "Comma separated angles including 0");

  // report
  Shared report_shared;
  std::string report_dir = "evaluation";
  auto* rep = app.add_subcommand("report", "Summarize an evaluation directory");
  add_shared(rep, report_shared, "");
  rep->add_option("--dir", report_dir, "Evaluation directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (gen->parsed()) {
      spec.seed = gen_shared.seed;
      if (gen_shared.dt) spec.dt = *gen_shared.dt;
      if (leader_kind == "sinusoid") {
        spec.leader = sinusoid;
      } else if (leader_kind == "piecewise") {
        PiecewiseProfile p;
        for (const auto& seg : split(segments, ',')) {
          const auto parts = split(seg, ':');
          if (parts.size() != 2) throw ConfigError("segments need duration:speed");
          p.segments.push_back({to_double(parts[0]), to_double(parts[1])});
        }
        spec.leader = p;
      } else {
        if (leader_csv.empty()) throw ConfigError("--leader csv needs --leader-csv");
        spec.leader = CsvProfile{leader_csv, leader_id};
      }
      if (!spacings.empty()) spec.initial_spacings = parse_list(spacings);
      if (!av_params.empty()) spec.av_reference = parse_idm(av_params);
      if (!follower_params.empty()) {
        spec.follower_params.clear();
        for (const auto& f : follower_params) spec.follower_params.push_back(parse_idm(f));
      }
      gen_synthetic({spec, gen_shared.out});
    } else if (calc->parsed()) {
      cal.data = data;
      cal.dt = cal_shared.dt;
      cal.out = cal_shared.out;
      if (!v0_axis.empty()) cal.grid.v0 = parse_axis(v0_axis);
      if (!a_axis.empty()) cal.grid.a_max = parse_axis(a_axis);
      if (!b_axis.empty()) cal.grid.b = parse_axis(b_axis);
      if (!s0_axis.empty()) cal.grid.s0 = parse_axis(s0_axis);
      if (!tau_axis.empty()) cal.grid.tau = parse_axis(tau_axis);
      if (!delta_axis.empty()) cal.grid.delta = parse_axis(delta_axis);
      calibrate(cal);
    } else if (trc->parsed()) {
      tr.scenario = scenario_path;
      tr.dt = train_shared.dt;
      tr.out = train_shared.out;
      tr.config.seed = train_shared.seed;
      tr.weights.ramp.full_at_epoch =
          ramp_epochs ? *ramp_epochs : std::max(1, tr.config.epochs / 2);
      tr.weights.trend_form = trend == "hinge" ? TrendForm::kHinge : TrendForm::kSymmetric;
      tr.config.optimizer =
          optimizer == "adam" ? OptimizerKind::kAdam : OptimizerKind::kGradientDescent;
      if (!phis_text.empty()) tr.config.phi_set = parse_phis(phis_text);
      train(tr);
    } else if (evc->parsed()) {
      ev.checkpoint = checkpoint;
      ev.scenario = eval_scenario;
      ev.dt = eval_shared.dt;
      ev.seed = eval_shared.seed;
      ev.out = eval_shared.out;
      if (!eval_phis.empty()) ev.phis = parse_phis(eval_phis);
      evaluate(ev);
    } else if (rep->parsed()) {
      report({report_dir, report_shared.out});
    }
  } catch (const NumericalError& e) {
    fmt::print(stderr, "numerical failure: {}\n", e.what());
    return kExitNumerical;
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitInput;
  }
  return kExitOk;
}

}  // namespace sacc::cli
