#pragma once

// LSTM acceleration policy for the automated vehicle. A window of recent
// (spacing, relative speed, own speed) observations is run through a
// single-layer LSTM from a zero state; the final hidden state is
// concatenated with the (cos phi, sin phi) encoding of the social preference
// and mapped by an affine head to a_lim * tanh(z).

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sacc/core_model.h"

namespace sacc {

inline constexpr int kObservationDim = 3;
inline constexpr int kNumGates = 4;  // input, forget, cell, output

// Per-feature affine normalization: x_norm = (x - offset) / scale.
struct FeatureNormalization {
  std::array<double, kObservationDim> offset{0.0, 0.0, 0.0};
  std::array<double, kObservationDim> scale{1.0, 1.0, 1.0};
  bool operator==(const FeatureNormalization&) const = default;
};

struct ControllerShape {
  int hidden_dim = 32;
  int seq_len = 10;
  double a_lim = 3.0;
};

// All learnable weights plus architecture metadata. Gate blocks are stacked
// in the order input, forget, cell, output: rows [g*H, (g+1)*H) of the
// stacked matrices belong to gate g.
struct ControllerParams {
  int input_dim = kObservationDim;
  int hidden_dim = 0;
  int seq_len = 1;
  double a_lim = 3.0;
  FeatureNormalization normalization;

  Eigen::MatrixXd w_input;   // 4H x 3
  Eigen::MatrixXd w_hidden;  // 4H x H
  Eigen::VectorXd bias;      // 4H
  Eigen::VectorXd head_w;    // H + 2; last two entries weight (cos, sin)
  double head_b = 0.0;

  // Zero weights with the given shape.
  static ControllerParams zeros(const ControllerShape& shape);

  std::size_t parameter_count() const;
  // Weights in serialization order: for each gate, its input-to-hidden block
  // (row-major), hidden-to-hidden block (row-major), and bias; then the head
  // weights and the head bias.
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> values);

  bool operator==(const ControllerParams& other) const;
};

// Throws ParameterError on inconsistent shapes or bounds.
void validate(const ControllerParams& params);

// Uniform(-1/sqrt(H), 1/sqrt(H)) for every weight, forget-gate bias +1.
ControllerParams init_controller(const ControllerShape& shape,
                                 std::uint64_t seed);

using ObservationRows =
    Eigen::Matrix<double, Eigen::Dynamic, kObservationDim, Eigen::RowMajor>;

// Raw observations, oldest first, plus the normalization they are fed
// through.
struct ObservationWindow {
  ObservationRows rows;
  FeatureNormalization normalization;
};

std::array<double, 2> encode_phi(SvoAngle phi);

// Window ending at history.back() for the vehicle at `vehicle` (>= 1).
// Rows before the start of the history repeat the first observation.
ObservationWindow make_window(std::span<const PlatoonState> history,
                              std::size_t vehicle,
                              const ControllerParams& params);

Eigen::VectorXd lstm_forward(const ControllerParams& params,
                             const ObservationWindow& window);

double predict_accel(const ControllerParams& params,
                     const ObservationWindow& window, SvoAngle phi);

// Reverse pass of predict_accel. Adds d_output * d(output)/d(theta) into
// `grad` (same shapes as params) and returns d(output)/d(raw rows) scaled by
// d_output.
ObservationRows predict_accel_backward(const ControllerParams& params,
                                       const ObservationWindow& window,
                                       SvoAngle phi, double d_output,
                                       ControllerParams& grad);

}  // namespace sacc
