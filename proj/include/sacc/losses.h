#pragma once

// Loss terms of the socially weighted training objective. Every time
// integral is discretized with the rectangle rule over the sampled series.

#include <span>
#include <vector>

#include "sacc/core_model.h"

namespace sacc {

// sum_k (a_pred_k - a_true_k)^2 dt
double loss_prediction(std::span<const double> a_pred,
                       std::span<const double> a_true, double dt);

// Energy consumption indicator: sum_k 0.5 a_k^2 dt. Unit-free.
double u_self(std::span<const double> accelerations, double dt);

// sum_k 0.5 (v_k - v_target)^2 dt over the first follower's speeds.
double u_collective(std::span<const double> speeds, double v_target,
                    double dt);

// cos(phi) u_self + sin(phi) u_collective.
double loss_cost(double u_self_value, double u_collective_value, SvoAngle phi);

// sum over forward differences of ((a_{k+1} - a_k) / dt)^2 dt.
double loss_smoothness(std::span<const double> accelerations, double dt);

struct PhiUtility {
  SvoAngle phi;
  double u_self = 0.0;
  double u_collective = 0.0;
};

struct PhiPair {
  SvoAngle lower;
  SvoAngle upper;
};

enum class TrendForm {
  // relu(U_self(lo) - U_self(hi))^2 + relu(U_coll(hi) - U_coll(lo))^2
  kHinge,
  // (U_self(lo) - U_self(hi))^2 + (U_coll(hi) - U_coll(lo))^2
  kSymmetric,
};

// Penalizes U_self falling or U_collective rising as phi increases.
// Throws ConfigError when a pair refers to a phi missing from `utilities`.
double loss_trend(std::span<const PhiUtility> utilities,
                  std::span<const PhiPair> pairs,
                  TrendForm form = TrendForm::kHinge);

// d loss_trend / d U_self and d U_collective for each entry of `utilities`.
struct TrendGradient {
  std::vector<double> d_self;
  std::vector<double> d_collective;
};
TrendGradient loss_trend_gradient(std::span<const PhiUtility> utilities,
                                  std::span<const PhiPair> pairs,
                                  TrendForm form = TrendForm::kHinge);

// Consecutive pairs of the ascending-sorted angle set.
std::vector<PhiPair> consecutive_pairs(std::span<const SvoAngle> phis);

}  // namespace sacc
