#include "sacc/losses.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "sacc/errors.h"

namespace sacc {
namespace {

void require_positive_dt(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be > 0");
}

std::size_t index_of(std::span<const PhiUtility> utilities, SvoAngle phi) {
  for (std::size_t i = 0; i < utilities.size(); ++i) {
    if (utilities[i].phi == phi) return i;
  }
  throw ConfigError(fmt::format("no utilities recorded for phi = {}",
                                format_svo_angle(phi)));
}

double relu(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace

double loss_prediction(std::span<const double> a_pred,
                       std::span<const double> a_true, double dt) {
  require_positive_dt(dt);
  if (a_pred.size() != a_true.size()) {
    throw ShapeError(fmt::format("prediction has {} samples, truth has {}",
                                 a_pred.size(), a_true.size()));
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < a_pred.size(); ++k) {
    const double e = a_pred[k] - a_true[k];
    sum += e * e * dt;
  }
  return sum;
}

double u_self(std::span<const double> accelerations, double dt) {
  require_positive_dt(dt);
  double sum = 0.0;
  for (double a : accelerations) sum += 0.5 * a * a * dt;
  return sum;
}

double u_collective(std::span<const double> speeds, double v_target,
                    double dt) {
  require_positive_dt(dt);
  double sum = 0.0;
  for (double v : speeds) {
    const double e = v - v_target;
    sum += 0.5 * e * e * dt;
  }
  return sum;
}

double loss_cost(double u_self_value, double u_collective_value,
                 SvoAngle phi) {
  return phi.self_weight() * u_self_value +
         phi.collective_weight() * u_collective_value;
}

double loss_smoothness(std::span<const double> accelerations, double dt) {
  require_positive_dt(dt);
  if (accelerations.size() < 2) {
    throw ShapeError("smoothness needs at least two acceleration samples");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < accelerations.size(); ++k) {
    const double jerk = (accelerations[k + 1] - accelerations[k]) / dt;
    sum += jerk * jerk * dt;
  }
  return sum;
}

double loss_trend(std::span<const PhiUtility> utilities,
                  std::span<const PhiPair> pairs, TrendForm form) {
  double sum = 0.0;
  for (const PhiPair& pair : pairs) {
    const PhiUtility& lo = utilities[index_of(utilities, pair.lower)];
    const PhiUtility& hi = utilities[index_of(utilities, pair.upper)];
    double self_gap = lo.u_self - hi.u_self;
    double coll_gap = hi.u_collective - lo.u_collective;
    if (form == TrendForm::kHinge) {
      self_gap = relu(self_gap);
      coll_gap = relu(coll_gap);
    }
    sum += self_gap * self_gap + coll_gap * coll_gap;
  }
  return sum;
}

TrendGradient loss_trend_gradient(std::span<const PhiUtility> utilities,
                                  std::span<const PhiPair> pairs,
                                  TrendForm form) {
  TrendGradient g;
  g.d_self.assign(utilities.size(), 0.0);
  g.d_collective.assign(utilities.size(), 0.0);
  for (const PhiPair& pair : pairs) {
    const std::size_t lo = index_of(utilities, pair.lower);
    const std::size_t hi = index_of(utilities, pair.upper);
    double self_gap = utilities[lo].u_self - utilities[hi].u_self;
    double coll_gap = utilities[hi].u_collective - utilities[lo].u_collective;
    if (form == TrendForm::kHinge) {
      self_gap = relu(self_gap);
      coll_gap = relu(coll_gap);
    }
    g.d_self[lo] += 2.0 * self_gap;
    g.d_self[hi] -= 2.0 * self_gap;
    g.d_collective[hi] += 2.0 * coll_gap;
    g.d_collective[lo] -= 2.0 * coll_gap;
  }
  return g;
}

std::vector<PhiPair> consecutive_pairs(std::span<const SvoAngle> phis) {
  std::vector<SvoAngle> sorted(phis.begin(), phis.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<PhiPair> pairs;
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    pairs.push_back({sorted[i], sorted[i + 1]});
  }
  return pairs;
}

}  // namespace sacc
