// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when
// any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "sacc/calibration.h"
#include "sacc/cli.h"
#include "sacc/dynamics.h"
#include "sacc/ingest.h"
#include "sacc/losses.h"
#include "sacc/metrics.h"
#include "sacc/synthetic.h"
#include "sacc/training.h"

namespace {
using namespace sacc;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string detail;
  bool skipped = false;
};

int failures = 0;

void check(const std::string& name, double budget_s, const std::function<Verdict()>& body) {
  const auto start = Clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, fmt::format("exception: {}", e.what())};
  }
  const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
  if (v.skipped) {
    fmt::print("SKIP {}: {}\n", name, v.detail);
    return;
  }
  if (budget_s > 0 && elapsed > budget_s) {
    v.pass = false;
    v.detail += fmt::format(" (over budget {:.0f} s)", budget_s);
  }
  if (!v.pass) ++failures;
  fmt::print("{} {}: {} [{:.2f} s]\n", v.pass ? "PASS" : "FAIL", name, v.detail, elapsed);
  std::fflush(stdout);
}

// Relative error, or absolute error when both entries are below 1e-8.
double gradient_error(double analytic, double numeric) {
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  const double diff = std::abs(analytic - numeric);
  return scale < 1e-8 ? diff : diff / scale;
}

Verdict gradient_oracle() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  double worst_floored = 0.0;  // against max(|fd|, 1e-6 |L|)
  for (int n = 0; n < 20; ++n) {
    ScenarioSpec spec;
    spec.duration = 2.0;
    spec.seed = 100 + static_cast<std::uint64_t>(n);
    spec.leader_noise_std = 0.05;
    spec.initial_spacings[0] = 5.0 + 75.0 * u(rng);
    TrainConfig cfg;
    cfg.scenario = gen_synthetic(spec).scenario;
    cfg.shape = {4, 5, 3.0};
    LossWeights w = default_weights_for(10);
    w.alpha = 0.1 + u(rng);
    w.beta = 0.1 + u(rng);
    w.gamma = 0.01 + u(rng);
    const int epoch = static_cast<int>(10 * u(rng));
    const auto params = init_controller(cfg.shape, static_cast<std::uint64_t>(n));
    const auto gr = gradient(params, cfg, w, epoch);
    const auto g = gr.grad.flatten();
    const double floor = 1e-6 * std::max(1.0, std::abs(gr.loss.total));
    const auto theta = params.flatten();
    for (std::size_t j = 0; j < theta.size(); ++j) {
      auto tp = theta, tm = theta;
      tp[j] += 1e-5;
      tm[j] -= 1e-5;
      auto plus = params, minus = params;
      plus.unflatten(tp);
      minus.unflatten(tm);
      const double fd = (evaluate_loss(plus, cfg, w, epoch).total -
                         evaluate_loss(minus, cfg, w, epoch).total) / 2e-5;
      worst = std::max(worst, gradient_error(g[j], fd));
      worst_floored = std::max(worst_floored,
                               std::abs(g[j] - fd) / std::max(floor, std::abs(fd)));
    }
  }
  return {worst < 1e-4,
          fmt::format("max relative error {:.3e} over 20 instances, {:.3e} with a "
                      "1e-6 |L| roundoff floor",
                      worst, worst_floored)};
}

Verdict kinematics() {
  SimConfig cfg;
  cfg.horizon = 1000.0;
  std::vector<double> lead(10001);
  for (std::size_t k = 0; k < lead.size(); ++k) {
    lead[k] = 2.5 - 1.5 * std::cos(2 * M_PI * static_cast<double>(k) * 0.1 / 60.0);
  }
  const std::vector<double> speeds(5, lead[0]);
  const std::vector<double> gaps = {6.0, 6.0, 6.0, 6.0};
  const PlatoonState s = make_platoon_state(0.0, 0.0, speeds, gaps, cfg.vehicle_length);
  const AccelerationLaw laws[] = {
      PlaybackLaw{TrajectorySeries{1, 0.1, 0.0, lead, std::nullopt}, 0},
      IdmLaw{{5.00, 1.19, 0.50, 3.00, 1.50, 2.81}},
      IdmLaw{{5.00, 1.19, 0.50, 3.00, 1.50, 2.81}},
      IdmLaw{{5.00, 1.31, 3.00, 3.00, 1.50, 5.00}},
      IdmLaw{{5.00, 1.70, 0.50, 3.00, 1.50, 5.00}}};
  const RolloutResult r = rollout(s, laws, cfg);
  double worst = 0.0;
  for (const auto& state : r.states) {
    worst = std::max(worst, kinematic_consistency_error(state, cfg.vehicle_length));
  }
  return {worst <= 1e-9 && r.states.size() == 10001,
          fmt::format("{} steps, max error {:.3e} m", r.states.size() - 1, worst)};
}

Verdict calibration_oracle() {
  const std::vector<IdmParams> truth = {{5.00, 1.20, 0.50, 3.00, 1.50, 2.75},
                                        {5.00, 1.30, 3.00, 3.00, 1.50, 5.00},
                                        {5.00, 1.70, 0.50, 3.00, 1.50, 5.00}};
  ScenarioSpec spec;
  spec.initial_spacings = {6.0, 6.0, 6.0, 6.0};
  spec.follower_params = truth;
  const auto syn = gen_synthetic(spec);
  const GridSpec grid = GridSpec::defaults();
  bool ok = true;
  double worst = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto& lead = syn.trajectories[i + 1];
    const auto& follower = syn.trajectories[i + 2];
    const auto serial = grid_search_calibrate(grid, lead, follower, SimConfig{}, {5, 1});
    const auto parallel = grid_search_calibrate(grid, lead, follower, SimConfig{}, {5, 4});
    ok = ok && serial.best_params == truth[i] && serial.rmse <= 1e-6;
    ok = ok && serial.best_params == parallel.best_params && serial.rmse == parallel.rmse &&
         serial.runner_ups.size() == parallel.runner_ups.size();
    for (std::size_t k = 0; ok && k < serial.runner_ups.size(); ++k) {
      ok = serial.runner_ups[k].params == parallel.runner_ups[k].params &&
           serial.runner_ups[k].rmse == parallel.runner_ups[k].rmse;
    }
    worst = std::max(worst, serial.rmse);
  }
  return {ok, fmt::format("3 followers on a {}-point grid, worst rmse {:.3e} m",
                          grid.size(), worst)};
}

Verdict idm_values() {
  const double a = idm_acceleration({5.00, 1.19, 0.50, 3.00, 1.50, 2.81}, 0.0, 0.0, 30.0);
  const double b = idm_acceleration({5.00, 1.31, 3.00, 3.00, 1.50, 5.00}, 2.0, 1.0, 10.0);
  return {std::abs(a - 1.1781) <= 1e-4 && std::abs(b - 0.74236) <= 1e-4,
          fmt::format("{:.6f} and {:.6f}", a, b)};
}

Verdict utility_reductions() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  bool exact = true;
  for (int n = 0; n < 1000; ++n) {
    const double s = u(rng), c = u(rng);
    exact = exact && loss_cost(s, c, SvoAngle::egoistic()) == s &&
            loss_cost(s, c, SvoAngle::altruistic()) == c;
  }
  ScenarioSpec spec;
  spec.duration = 3.0;
  TrainConfig cfg;
  cfg.scenario = gen_synthetic(spec).scenario;
  cfg.shape = {4, 5, 3.0};
  double worst = 0.0;
  std::uniform_real_distribution<double> wdist(0.0, 2.0);
  for (int n = 0; n < 20; ++n) {
    LossWeights w = default_weights_for(10);
    w.alpha = wdist(rng);
    w.beta = wdist(rng);
    w.gamma = wdist(rng);
    const auto l = evaluate_loss(init_controller(cfg.shape, static_cast<std::uint64_t>(n)),
                                 cfg, w, n % 12);
    const double expected = w.alpha * l.prediction + w.beta * l.cost +
                            w.gamma * (l.smoothness + l.trend_weight * l.trend);
    worst = std::max(worst, std::abs(l.total - expected) / std::abs(expected));
  }
  return {exact && worst <= 1e-12,
          fmt::format("endpoint reductions {}, decomposition error {:.2e}",
                      exact ? "bit-exact" : "inexact", worst)};
}

struct ReferenceRun {
  TrainResult result;
  std::vector<RolloutResult> rollouts;  // phi = 0, pi/4, pi/2
  double initial_total = 0.0;
  double seconds = 0.0;
};

const ReferenceRun& reference_run() {
  static const ReferenceRun run = [] {
    const auto start = Clock::now();
    ReferenceRun r;
    TrainConfig cfg;
    cfg.scenario = gen_synthetic(ScenarioSpec{}).scenario;
    const LossWeights w = default_weights_for(cfg.epochs);
    r.result = train(cfg, w);
    r.initial_total = r.result.history.front().total;
    for (SvoAngle phi : cfg.phi_set) {
      r.rollouts.push_back(rollout_controller(r.result.params, cfg.scenario, phi));
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return r;
  }();
  return run;
}

Verdict svo_trend() {
  const auto& run = reference_run();
  const double dt = 0.1;
  std::vector<double> u_av;
  for (const auto& r : run.rollouts) u_av.push_back(u_self(r.accelerations[1], dt));
  const bool a = u_av[0] < u_av[1] && u_av[1] < u_av[2];

  auto follower_speed = [](const RolloutResult& r, std::size_t vehicle) {
    std::vector<double> v;
    for (const auto& s : r.states) v.push_back(s.speeds[vehicle]);
    return average_speed(v);
  };
  std::vector<double> gains;
  for (std::size_t i = 2; i < 5; ++i) {
    gains.push_back(percent_change(follower_speed(run.rollouts[0], i),
                                   follower_speed(run.rollouts[2], i)));
  }
  bool b = true;
  for (double g : gains) b = b && g >= 10.0;
  const bool c = gains[0] >= gains[1] && gains[1] >= gains[2];
  return {a && b && c,
          fmt::format("(a) U_self(v2) {:.4f} < {:.4f} < {:.4f}: {}; "
                      "(b) speed gains v3..v5 {:.2f}% {:.2f}% {:.2f}%: {}; (c) ordering: {}",
                      u_av[0], u_av[1], u_av[2], a ? "yes" : "no", gains[0], gains[1],
                      gains[2], b ? "yes" : "no", c ? "yes" : "no")};
}

Verdict training_regression() {
  const auto& run = reference_run();
  const double ratio = run.result.final_loss.total / run.initial_total;
  return {ratio < 0.5, fmt::format("final/initial total loss {:.4f} / {:.4f} = {:.3f}",
                                   run.result.final_loss.total, run.initial_total, ratio)};
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "sacc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / "sacc_acceptance_determinism";
  fs::remove_all(root);
  for (const char* tag : {"a", "b"}) {
    const fs::path t = root / (std::string("train_") + tag);
    const fs::path e = root / (std::string("eval_") + tag);
    if (cli({"train", "--epochs", "10", "--seed", "7", "--out", t.string()}) != 0 ||
        cli({"evaluate", "--checkpoint", (t / "checkpoint.bin").string(), "--seed", "7",
             "--out", e.string()}) != 0) {
      return {false, "subcommand failed"};
    }
  }
  std::size_t compared = 0;
  for (const char* kind : {"train_", "eval_"}) {
    for (const auto& entry : fs::directory_iterator(root / (std::string(kind) + "a"))) {
      const auto name = entry.path().filename();
      if (name == "manifest.json") continue;  // records its own input paths
      const fs::path other = root / (std::string(kind) + "b") / name;
      if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) {
        return {false, fmt::format("{} differs", name.string())};
      }
      ++compared;
    }
  }
  fs::remove_all(root);
  return {compared >= 6, fmt::format("{} artifacts bit-identical across two runs", compared)};
}

Verdict ared_calibration() {
  const char* path = std::getenv("SACC_ARED_CSV");
  if (path == nullptr || !fs::exists(path)) {
    return {false, "set SACC_ARED_CSV to a recorded trajectory CSV to run", true};
  }
  const auto series = load_csv(path);
  if (series.size() < 5) return {false, "need at least 5 vehicles"};
  const double expected[] = {3.95, 2.58, 0.35};
  bool ok = true;
  std::string detail;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto report = grid_search_calibrate(GridSpec::defaults(), series[i + 1],
                                              series[i + 2], SimConfig{}, {5, 0});
    ok = ok && std::abs(report.rmse - expected[i]) <= 0.2 * expected[i];
    detail += fmt::format("v{} rmse {:.3f} m (target {:.2f}) ", i + 3, report.rmse, expected[i]);
  }
  return {ok, detail};
}

}  // namespace

int main() {
  check("gradient oracle", 30.0, gradient_oracle);
  check("kinematic consistency", 1.0, kinematics);
  check("calibration oracle", 60.0, calibration_oracle);
  check("IDM formula", 0.0, idm_values);
  check("utility reductions", 0.0, utility_reductions);
  check("SVO trend", 300.0, svo_trend);
  check("training regression", 0.0, training_regression);
  check("determinism", 0.0, determinism);
  check("calibration on recorded data", 0.0, ared_calibration);
  return failures == 0 ? 0 : 1;
}
