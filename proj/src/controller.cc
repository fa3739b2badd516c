#include "sacc/controller.h"

#include <cmath>
#include <random>

#include <fmt/format.h>

#include "sacc/errors.h"

namespace sacc {
namespace {

constexpr int kForgetGate = 1;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Activations of one LSTM cell application.
struct CellCache {
  Eigen::VectorXd input_gate, forget_gate, candidate, output_gate;
  Eigen::VectorXd cell, hidden;
};

Eigen::RowVector3d normalized_row(const ObservationWindow& window, int t) {
  Eigen::RowVector3d x;
  for (int j = 0; j < kObservationDim; ++j) {
    x(j) = (window.rows(t, j) - window.normalization.offset[j]) /
           window.normalization.scale[j];
  }
  return x;
}

void check_window(const ControllerParams& params,
                  const ObservationWindow& window) {
  if (window.rows.rows() != params.seq_len) {
    throw ShapeError(fmt::format("window has {} rows, controller expects {}",
                                 window.rows.rows(), params.seq_len));
  }
  if (!window.rows.allFinite()) {
    throw ShapeError("observation window contains non-finite entries");
  }
}

std::vector<CellCache> run_lstm(const ControllerParams& p,
                                const ObservationWindow& window) {
  check_window(p, window);
  const int h = p.hidden_dim;
  std::vector<CellCache> caches(static_cast<std::size_t>(p.seq_len));
  Eigen::VectorXd hidden = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd cell = Eigen::VectorXd::Zero(h);
  for (int t = 0; t < p.seq_len; ++t) {
    const Eigen::VectorXd x = normalized_row(window, t).transpose();
    const Eigen::VectorXd pre = p.w_input * x + p.w_hidden * hidden + p.bias;
    CellCache& c = caches[static_cast<std::size_t>(t)];
    c.input_gate = pre.segment(0, h).unaryExpr(&sigmoid);
    c.forget_gate = pre.segment(h, h).unaryExpr(&sigmoid);
    c.candidate = pre.segment(2 * h, h).array().tanh();
    c.output_gate = pre.segment(3 * h, h).unaryExpr(&sigmoid);
    cell = c.forget_gate.cwiseProduct(cell) +
           c.input_gate.cwiseProduct(c.candidate);
    hidden = c.output_gate.cwiseProduct(cell.array().tanh().matrix());
    c.cell = cell;
    c.hidden = hidden;
  }
  return caches;
}

double head_preactivation(const ControllerParams& p,
                          const Eigen::VectorXd& hidden, SvoAngle phi) {
  const auto enc = encode_phi(phi);
  const int h = p.hidden_dim;
  return p.head_w.head(h).dot(hidden) + p.head_w(h) * enc[0] +
         p.head_w(h + 1) * enc[1] + p.head_b;
}

}  // namespace

ControllerParams ControllerParams::zeros(const ControllerShape& shape) {
  ControllerParams p;
  p.hidden_dim = shape.hidden_dim;
  p.seq_len = shape.seq_len;
  p.a_lim = shape.a_lim;
  const int h = shape.hidden_dim;
  p.w_input = Eigen::MatrixXd::Zero(kNumGates * h, kObservationDim);
  p.w_hidden = Eigen::MatrixXd::Zero(kNumGates * h, h);
  p.bias = Eigen::VectorXd::Zero(kNumGates * h);
  p.head_w = Eigen::VectorXd::Zero(h + 2);
  p.head_b = 0.0;
  return p;
}

std::size_t ControllerParams::parameter_count() const {
  const auto h = static_cast<std::size_t>(hidden_dim);
  return kNumGates * (h * kObservationDim + h * h + h) + (h + 2) + 1;
}

std::vector<double> ControllerParams::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  const int h = hidden_dim;
  for (int g = 0; g < kNumGates; ++g) {
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < kObservationDim; ++c) {
        out.push_back(w_input(g * h + r, c));
      }
    }
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < h; ++c) out.push_back(w_hidden(g * h + r, c));
    }
    for (int r = 0; r < h; ++r) out.push_back(bias(g * h + r));
  }
  for (int i = 0; i < h + 2; ++i) out.push_back(head_w(i));
  out.push_back(head_b);
  return out;
}

void ControllerParams::unflatten(std::span<const double> values) {
  if (values.size() != parameter_count()) {
    throw ShapeError(fmt::format("expected {} weights, got {}",
                                 parameter_count(), values.size()));
  }
  std::size_t k = 0;
  const int h = hidden_dim;
  for (int g = 0; g < kNumGates; ++g) {
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < kObservationDim; ++c) {
        w_input(g * h + r, c) = values[k++];
      }
    }
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < h; ++c) w_hidden(g * h + r, c) = values[k++];
    }
    for (int r = 0; r < h; ++r) bias(g * h + r) = values[k++];
  }
  for (int i = 0; i < h + 2; ++i) head_w(i) = values[k++];
  head_b = values[k++];
}

bool ControllerParams::operator==(const ControllerParams& o) const {
  return input_dim == o.input_dim && hidden_dim == o.hidden_dim &&
         seq_len == o.seq_len && a_lim == o.a_lim &&
         normalization == o.normalization && w_input == o.w_input &&
         w_hidden == o.w_hidden && bias == o.bias && head_w == o.head_w &&
         head_b == o.head_b;
}

void validate(const ControllerParams& p) {
  if (p.input_dim != kObservationDim) {
    throw ParameterError(fmt::format("input_dim must be {}, got {}",
                                     kObservationDim, p.input_dim));
  }
  if (p.hidden_dim < 1) throw ParameterError("hidden_dim must be >= 1");
  if (p.seq_len < 1) throw ParameterError("seq_len must be >= 1");
  if (!std::isfinite(p.a_lim) || p.a_lim <= 0.0) {
    throw ParameterError("a_lim must be > 0");
  }
  const int g = kNumGates * p.hidden_dim;
  if (p.w_input.rows() != g || p.w_input.cols() != kObservationDim ||
      p.w_hidden.rows() != g || p.w_hidden.cols() != p.hidden_dim ||
      p.bias.size() != g || p.head_w.size() != p.hidden_dim + 2) {
    throw ParameterError("controller weight shapes do not match hidden_dim");
  }
  for (int j = 0; j < kObservationDim; ++j) {
    const double s = p.normalization.scale[j];
    if (!std::isfinite(s) || s <= 0.0 ||
        !std::isfinite(p.normalization.offset[j])) {
      throw ParameterError("normalization scales must be finite and > 0");
    }
  }
}

ControllerParams init_controller(const ControllerShape& shape,
                                 std::uint64_t seed) {
  ControllerParams p = ControllerParams::zeros(shape);
  validate(p);
  std::mt19937_64 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(shape.hidden_dim));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> flat(p.parameter_count());
  for (double& w : flat) w = dist(rng);
  p.unflatten(flat);
  p.bias.segment(kForgetGate * shape.hidden_dim, shape.hidden_dim)
      .setConstant(1.0);
  return p;
}

std::array<double, 2> encode_phi(SvoAngle phi) {
  return {phi.self_weight(), phi.collective_weight()};
}

ObservationWindow make_window(std::span<const PlatoonState> history,
                              std::size_t vehicle,
                              const ControllerParams& params) {
  if (history.empty()) throw ShapeError("empty observation history");
  if (vehicle < 1 || vehicle >= history.back().size()) {
    throw ShapeError(fmt::format("vehicle {} has no predecessor", vehicle));
  }
  ObservationWindow window;
  window.normalization = params.normalization;
  window.rows.resize(params.seq_len, kObservationDim);
  const auto len = static_cast<std::ptrdiff_t>(params.seq_len);
  const auto last = static_cast<std::ptrdiff_t>(history.size()) - 1;
  for (std::ptrdiff_t r = 0; r < len; ++r) {
    const std::ptrdiff_t idx = std::max<std::ptrdiff_t>(0, last - (len - 1) + r);
    const PlatoonState& s = history[static_cast<std::size_t>(idx)];
    window.rows(r, 0) = s.spacing_of(vehicle);
    window.rows(r, 1) = s.speeds[vehicle - 1] - s.speeds[vehicle];
    window.rows(r, 2) = s.speeds[vehicle];
  }
  return window;
}

Eigen::VectorXd lstm_forward(const ControllerParams& params,
                             const ObservationWindow& window) {
  validate(params);
  return run_lstm(params, window).back().hidden;
}

double predict_accel(const ControllerParams& params,
                     const ObservationWindow& window, SvoAngle phi) {
  const Eigen::VectorXd hidden = lstm_forward(params, window);
  return params.a_lim * std::tanh(head_preactivation(params, hidden, phi));
}

ObservationRows predict_accel_backward(const ControllerParams& p,
                                       const ObservationWindow& window,
                                       SvoAngle phi, double d_output,
                                       ControllerParams& grad) {
  validate(p);
  const int h = p.hidden_dim;
  const auto caches = run_lstm(p, window);
  const Eigen::VectorXd& final_hidden = caches.back().hidden;
  const double th = std::tanh(head_preactivation(p, final_hidden, phi));
  const double dz = d_output * p.a_lim * (1.0 - th * th);

  const auto enc = encode_phi(phi);
  grad.head_w.head(h) += dz * final_hidden;
  grad.head_w(h) += dz * enc[0];
  grad.head_w(h + 1) += dz * enc[1];
  grad.head_b += dz;

  ObservationRows d_rows = ObservationRows::Zero(p.seq_len, kObservationDim);
  Eigen::VectorXd d_hidden = dz * p.head_w.head(h);
  Eigen::VectorXd d_cell = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd d_pre(kNumGates * h);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(h);

  for (int t = p.seq_len - 1; t >= 0; --t) {
    const CellCache& c = caches[static_cast<std::size_t>(t)];
    const Eigen::VectorXd& prev_cell =
        t > 0 ? caches[static_cast<std::size_t>(t - 1)].cell : zero;
    const Eigen::VectorXd& prev_hidden =
        t > 0 ? caches[static_cast<std::size_t>(t - 1)].hidden : zero;

    const Eigen::ArrayXd tc = c.cell.array().tanh();
    const Eigen::ArrayXd d_out_gate = d_hidden.array() * tc;
    d_cell.array() += d_hidden.array() * c.output_gate.array() * (1.0 - tc * tc);

    const Eigen::ArrayXd i = c.input_gate.array();
    const Eigen::ArrayXd f = c.forget_gate.array();
    const Eigen::ArrayXd g = c.candidate.array();
    const Eigen::ArrayXd o = c.output_gate.array();
    d_pre.segment(0, h) = (d_cell.array() * g * i * (1.0 - i)).matrix();
    d_pre.segment(h, h) =
        (d_cell.array() * prev_cell.array() * f * (1.0 - f)).matrix();
    d_pre.segment(2 * h, h) = (d_cell.array() * i * (1.0 - g * g)).matrix();
    d_pre.segment(3 * h, h) = (d_out_gate * o * (1.0 - o)).matrix();

    const Eigen::RowVector3d x = normalized_row(window, t);
    grad.w_input.noalias() += d_pre * x;
    grad.w_hidden.noalias() += d_pre * prev_hidden.transpose();
    grad.bias += d_pre;

    const Eigen::RowVector3d dx = (p.w_input.transpose() * d_pre).transpose();
    for (int j = 0; j < kObservationDim; ++j) {
      d_rows(t, j) = dx(j) / window.normalization.scale[j];
    }
    d_hidden = p.w_hidden.transpose() * d_pre;
    d_cell = (d_cell.array() * f).matrix();
  }
  return d_rows;
}

}  // namespace sacc
