#include "sacc/training.h"

#include <cmath>
#include <future>
#include <memory>

#include <fmt/format.h>

#include "sacc/errors.h"

namespace sacc {
namespace {

constexpr std::size_t kAvIndex = 1;
constexpr std::size_t kFirstFollower = 2;

// Forward pass for one angle, kept for the reverse sweep.
struct PhiRollout {
  SvoAngle phi;
  RolloutResult result;
  double prediction = 0.0;
  double smoothness = 0.0;
  double u_self = 0.0;
  double u_collective = 0.0;
};

std::vector<PhiPair> resolved_pairs(const TrainConfig& cfg) {
  if (!cfg.phi_pairs.empty()) return cfg.phi_pairs;
  return consecutive_pairs(cfg.phi_set);
}

// Followers whose speeds enter U_collective, with their weights.
std::vector<std::pair<std::size_t, double>> collective_vehicles(
    const TrainConfig& cfg) {
  const std::size_t n = cfg.scenario.vehicle_count();
  if (n <= kFirstFollower) {
    throw ConfigError("U_collective needs at least one follower behind the AV");
  }
  if (!cfg.collective_all_followers) return {{kFirstFollower, 1.0}};
  const double w = 1.0 / static_cast<double>(n - kFirstFollower);
  std::vector<std::pair<std::size_t, double>> out;
  for (std::size_t i = kFirstFollower; i < n; ++i) out.emplace_back(i, w);
  return out;
}

PhiRollout forward_phi(const std::shared_ptr<const ControllerParams>& params,
                       const TrainConfig& cfg, SvoAngle phi) {
  const Scenario& sc = cfg.scenario;
  const auto laws = scenario_laws(sc, NeuralLaw{params, phi});
  PhiRollout out{phi, rollout(sc.initial, laws, sc.sim)};
  const double dt = sc.sim.dt;
  const auto& a_av = out.result.accelerations[kAvIndex];
  out.prediction = loss_prediction(a_av, sc.a_true, dt);
  out.smoothness = loss_smoothness(a_av, dt);
  out.u_self = u_self(a_av, dt);
  for (const auto& [vehicle, weight] : collective_vehicles(cfg)) {
    const auto speeds = out.result.speeds_of(vehicle);
    out.u_collective +=
        weight * u_collective(std::span(speeds).subspan(1), cfg.v_target, dt);
  }
  return out;
}

std::vector<PhiRollout> forward_all(const ControllerParams& params,
                                    const TrainConfig& cfg) {
  auto shared = std::make_shared<const ControllerParams>(params);
  std::vector<PhiRollout> out;
  out.reserve(cfg.phi_set.size());
  if (cfg.threads > 1 && cfg.phi_set.size() > 1) {
    std::vector<std::future<PhiRollout>> jobs;
    for (SvoAngle phi : cfg.phi_set) {
      jobs.push_back(std::async(std::launch::async, forward_phi,
                                std::cref(shared), std::cref(cfg), phi));
    }
    for (auto& job : jobs) out.push_back(job.get());
  } else {
    for (SvoAngle phi : cfg.phi_set) out.push_back(forward_phi(shared, cfg, phi));
  }
  return out;
}

LossBreakdown assemble(const std::vector<PhiRollout>& rollouts,
                       const TrainConfig& cfg, const LossWeights& w,
                       int epoch) {
  LossBreakdown loss;
  for (const auto& r : rollouts) {
    loss.prediction += r.prediction;
    loss.smoothness += r.smoothness;
    loss.cost += loss_cost(r.u_self, r.u_collective, r.phi);
    loss.utilities.push_back({r.phi, r.u_self, r.u_collective});
  }
  loss.trend = loss_trend(loss.utilities, resolved_pairs(cfg), w.trend_form);
  loss.trend_weight = w.ramp.at(epoch);
  loss.total = recombine(loss, w);
  return loss;
}

// Reverse sweep of one angle's rollout. d_self and d_collective are the
// derivatives of the total loss with respect to this angle's U_self and
// U_collective.
void backward_phi(const ControllerParams& params, const TrainConfig& cfg,
                  const LossWeights& w, const PhiRollout& fwd, double d_self,
                  double d_collective, ControllerParams& grad) {
  const Scenario& sc = cfg.scenario;
  const RolloutResult& r = fwd.result;
  const double dt = sc.sim.dt;
  const std::size_t steps = r.flags.size();
  const std::size_t n = sc.vehicle_count();
  const auto& u = r.accelerations[kAvIndex];

  // adj_v[k][i], adj_s[k][i] for state k; spacing index is the vehicle index.
  std::vector<std::vector<double>> adj_v(steps + 1, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> adj_s(steps + 1, std::vector<double>(n, 0.0));

  std::vector<double> adj_u(steps, 0.0);
  for (std::size_t k = 0; k < steps; ++k) {
    adj_u[k] += w.alpha * 2.0 * (u[k] - sc.a_true[k]) * dt;
    adj_u[k] += d_self * u[k] * dt;
    if (k >= 1) adj_u[k] += w.gamma * 2.0 * (u[k] - u[k - 1]) / dt;
    if (k + 1 < steps) adj_u[k] -= w.gamma * 2.0 * (u[k + 1] - u[k]) / dt;
  }
  for (const auto& [vehicle, weight] : collective_vehicles(cfg)) {
    for (std::size_t k = 1; k <= steps; ++k) {
      adj_v[k][vehicle] +=
          d_collective * weight * (r.states[k].speeds[vehicle] - cfg.v_target) * dt;
    }
  }

  const std::span<const PlatoonState> history(r.states);
  for (std::size_t kk = steps; kk-- > 0;) {
    const PlatoonState& state = r.states[kk];
    const StepFlags& flags = r.flags[kk];
    for (std::size_t i = n - 1; i >= 1; --i) {
      double adj_accel = 0.0;
      const double g_v = adj_v[kk + 1][i];
      if (flags.speed_capped[i]) {
        adj_v[kk + 1][i - 1] += g_v;
      } else if (!flags.speed_floored[i]) {
        adj_v[kk][i] += g_v;
        adj_accel += g_v * dt;
      }
      const double g_s = adj_s[kk + 1][i];
      if (!flags.spacing_floored[i]) {
        adj_s[kk][i] += g_s;
        adj_v[kk][i - 1] += g_s * dt;
        adj_v[kk][i] -= g_s * dt;
      }

      if (i == kAvIndex) {
        adj_accel += adj_u[kk];
        if (adj_accel != 0.0) {
          const ObservationWindow window =
              make_window(history.first(kk + 1), kAvIndex, params);
          const ObservationRows d_rows =
              predict_accel_backward(params, window, fwd.phi, adj_accel, grad);
          const auto len = static_cast<std::ptrdiff_t>(params.seq_len);
          for (std::ptrdiff_t row = 0; row < len; ++row) {
            const auto idx = static_cast<std::size_t>(std::max<std::ptrdiff_t>(
                0, static_cast<std::ptrdiff_t>(kk) - (len - 1) + row));
            adj_s[idx][kAvIndex] += d_rows(row, 0);
            adj_v[idx][kAvIndex - 1] += d_rows(row, 1);
            adj_v[idx][kAvIndex] += -d_rows(row, 1) + d_rows(row, 2);
          }
        }
      } else if (adj_accel != 0.0) {
        const IdmPartials d = idm_partials(sc.followers[i - kFirstFollower],
                                           state.speeds[i], state.speeds[i - 1],
                                           state.spacing_of(i));
        adj_v[kk][i] += adj_accel * d.d_speed;
        adj_v[kk][i - 1] += adj_accel * d.d_lead_speed;
        adj_s[kk][i] += adj_accel * d.d_spacing;
      }
    }
  }
}

void check_finite(const LossBreakdown& loss, int epoch) {
  if (!std::isfinite(loss.total)) throw DivergenceError(epoch);
}

}  // namespace

double TrendRamp::at(int epoch) const {
  if (full_at_epoch <= 0) return 1.0;
  return std::min(1.0, static_cast<double>(std::max(epoch, 0)) /
                           static_cast<double>(full_at_epoch));
}

void validate(const LossWeights& w) {
  for (double x : {w.alpha, w.beta, w.gamma}) {
    if (!std::isfinite(x) || x < 0.0) {
      throw ConfigError("loss weights must be finite and >= 0");
    }
  }
  if (w.alpha == 0.0 && w.beta == 0.0 && w.gamma == 0.0) {
    throw ConfigError("at least one loss weight must be positive");
  }
}

void validate(const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!std::isfinite(cfg.learning_rate) || cfg.learning_rate < 0.0) {
    throw ConfigError("learning rate must be >= 0");
  }
  if (cfg.phi_set.empty()) throw ConfigError("phi_set must not be empty");
  for (const auto& pair : cfg.phi_pairs) {
    if (!(pair.lower < pair.upper)) {
      throw ConfigError("every phi pair needs lower < upper");
    }
  }
  if (!std::isfinite(cfg.v_target) || cfg.v_target <= 0.0) {
    throw ConfigError("v_target must be > 0");
  }
  if (cfg.shape.hidden_dim < 1 || cfg.shape.seq_len < 1 ||
      !(cfg.shape.a_lim > 0.0)) {
    throw ConfigError("invalid controller shape");
  }
  validate(cfg.scenario);
  if (cfg.scenario.sim.steps() < 2) {
    throw ConfigError("training horizon needs at least two steps");
  }
}

LossWeights default_weights_for(int epochs) {
  LossWeights w;
  w.ramp.full_at_epoch = std::max(1, epochs / 2);
  return w;
}

double recombine(const LossBreakdown& loss, const LossWeights& w) {
  return w.alpha * loss.prediction + w.beta * loss.cost +
         w.gamma * (loss.smoothness + loss.trend_weight * loss.trend);
}

LossBreakdown evaluate_loss(const ControllerParams& params,
                            const TrainConfig& cfg, const LossWeights& weights,
                            int epoch) {
  validate(weights);
  validate(params);
  return assemble(forward_all(params, cfg), cfg, weights, epoch);
}

GradientResult gradient(const ControllerParams& params, const TrainConfig& cfg,
                        const LossWeights& weights, int epoch) {
  validate(weights);
  validate(params);
  const auto rollouts = forward_all(params, cfg);
  GradientResult out{assemble(rollouts, cfg, weights, epoch),
                     ControllerParams::zeros({params.hidden_dim, params.seq_len,
                                              params.a_lim})};
  out.grad.normalization = params.normalization;

  const TrendGradient trend = loss_trend_gradient(
      out.loss.utilities, resolved_pairs(cfg), weights.trend_form);
  const double trend_scale = weights.gamma * out.loss.trend_weight;

  std::vector<ControllerParams> partials(rollouts.size(), out.grad);
  auto run = [&](std::size_t j) {
    const SvoAngle phi = rollouts[j].phi;
    const double d_self =
        weights.beta * phi.self_weight() + trend_scale * trend.d_self[j];
    const double d_coll = weights.beta * phi.collective_weight() +
                          trend_scale * trend.d_collective[j];
    backward_phi(params, cfg, weights, rollouts[j], d_self, d_coll,
                 partials[j]);
  };
  if (cfg.threads > 1 && rollouts.size() > 1) {
    std::vector<std::future<void>> jobs;
    for (std::size_t j = 0; j < rollouts.size(); ++j) {
      jobs.push_back(std::async(std::launch::async, run, j));
    }
    for (auto& job : jobs) job.get();
  } else {
    for (std::size_t j = 0; j < rollouts.size(); ++j) run(j);
  }
  // Fixed phi-index order keeps the sum independent of scheduling.
  for (const auto& p : partials) {
    out.grad.w_input += p.w_input;
    out.grad.w_hidden += p.w_hidden;
    out.grad.bias += p.bias;
    out.grad.head_w += p.head_w;
    out.grad.head_b += p.head_b;
  }
  return out;
}

ControllerParams initial_controller(const TrainConfig& cfg) {
  ControllerParams params = init_controller(cfg.shape, cfg.seed);
  params.normalization = normalization_from_reference(cfg.scenario);
  return params;
}

TrainResult train(const TrainConfig& cfg, const LossWeights& weights,
                  const std::function<void(int, const LossBreakdown&)>& on_epoch) {
  validate(cfg);
  validate(weights);
  TrainResult result{initial_controller(cfg), {}, {}};
  std::vector<double> theta = result.params.flatten();
  std::vector<double> m(theta.size(), 0.0), v(theta.size(), 0.0);
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    GradientResult g = gradient(result.params, cfg, weights, epoch);
    check_finite(g.loss, epoch);
    result.history.push_back(g.loss);
    if (on_epoch) on_epoch(epoch, g.loss);

    const std::vector<double> grad = g.grad.flatten();
    for (double x : grad) {
      if (!std::isfinite(x)) throw DivergenceError(epoch);
    }
    if (cfg.optimizer == OptimizerKind::kGradientDescent) {
      for (std::size_t j = 0; j < theta.size(); ++j) {
        theta[j] -= cfg.learning_rate * grad[j];
      }
    } else {
      const double t = static_cast<double>(epoch + 1);
      const double c1 = 1.0 - std::pow(kBeta1, t);
      const double c2 = 1.0 - std::pow(kBeta2, t);
      for (std::size_t j = 0; j < theta.size(); ++j) {
        m[j] = kBeta1 * m[j] + (1.0 - kBeta1) * grad[j];
        v[j] = kBeta2 * v[j] + (1.0 - kBeta2) * grad[j] * grad[j];
        theta[j] -= cfg.learning_rate * (m[j] / c1) / (std::sqrt(v[j] / c2) + kEps);
      }
    }
    for (double x : theta) {
      if (!std::isfinite(x)) throw DivergenceError(epoch);
    }
    result.params.unflatten(theta);
  }
  result.final_loss = evaluate_loss(result.params, cfg, weights, cfg.epochs);
  check_finite(result.final_loss, cfg.epochs);
  return result;
}

RolloutResult rollout_controller(const ControllerParams& params,
                                 const Scenario& scenario, SvoAngle phi) {
  validate(params);
  validate(scenario);
  auto shared = std::make_shared<const ControllerParams>(params);
  return rollout(scenario.initial, scenario_laws(scenario, NeuralLaw{shared, phi}),
                 scenario.sim);
}

}  // namespace sacc
