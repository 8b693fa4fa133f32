#include "vrsg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "vrsg/errors.hpp"

namespace vrsg {

Vector project_l1_ball(const Vector& v, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidArgument("l1 radius must be positive");
  if (!v.allFinite()) throw InvalidArgument("l1 projection of a non-finite vector");
  const double norm1 = v.lpNorm<1>();
  if (norm1 <= tau) return v;

  std::vector<double> mags(static_cast<std::size_t>(v.size()));
  for (Eigen::Index j = 0; j < v.size(); ++j) mags[static_cast<std::size_t>(j)] = std::abs(v[j]);
  std::sort(mags.begin(), mags.end(), std::greater<>());

  // Largest k with mags[k-1] > (sum_{j<k} mags[j] - tau) / k.
  double running = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < mags.size(); ++k) {
    running += mags[k];
    const double candidate = (running - tau) / static_cast<double>(k + 1);
    if (mags[k] > candidate) theta = candidate;
    else break;
  }

  Vector out(v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const double m = std::abs(v[j]) - theta;
    out[j] = m > 0.0 ? std::copysign(m, v[j]) : 0.0;
  }
  // Rounding in theta can leave the result a few ulps outside; pull it back.
  const double out1 = out.lpNorm<1>();
  if (out1 > tau) out *= tau / out1;
  return out;
}

Vector project_box(const Vector& v, const Vector& lower, const Vector& upper) {
  if (lower.size() != v.size() || upper.size() != v.size()) {
    throw InvalidArgument("box projection: bound lengths do not match the vector");
  }
  Vector out(v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (lower[j] > upper[j]) throw InvalidArgument("box projection: lower > upper");
    out[j] = std::clamp(v[j], lower[j], upper[j]);
  }
  return out;
}

Vector prox_l1(const Vector& v, double threshold) {
  if (!(threshold >= 0.0)) throw InvalidArgument("soft-threshold level must be nonnegative");
  if (threshold == 0.0) return v;
  Vector out(v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const double m = std::abs(v[j]) - threshold;
    out[j] = m > 0.0 ? std::copysign(m, v[j]) : 0.0;
  }
  return out;
}

Vector project(const ConstraintSpec& constraint, const Vector& v) {
  if (const auto* ball = std::get_if<L1Ball>(&constraint)) return project_l1_ball(v, ball->tau);
  const auto& box = std::get<Box>(constraint);
  return project_box(v, box.lower, box.upper);
}

bool is_feasible(const ConstraintSpec& constraint, const Vector& w, double tolerance) {
  if (const auto* ball = std::get_if<L1Ball>(&constraint)) {
    return w.lpNorm<1>() <= ball->tau + tolerance;
  }
  const auto& box = std::get<Box>(constraint);
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    if (w[j] < box.lower[j] - tolerance || w[j] > box.upper[j] + tolerance) return false;
  }
  return true;
}

double diameter(const ConstraintSpec& constraint) {
  if (const auto* ball = std::get_if<L1Ball>(&constraint)) return 2.0 * ball->tau;
  const auto& box = std::get<Box>(constraint);
  return (box.upper - box.lower).norm();
}

Vector proximal_step(const Problem& problem, const Vector& point, double eta) {
  if (problem.is_constrained()) return project(problem.constraint(), point);
  return prox_l1(point, eta * problem.regularizer().lambda);
}

}  // namespace vrsg
