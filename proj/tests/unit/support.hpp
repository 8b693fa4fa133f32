#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "vrsg/geometry.hpp"
#include "vrsg/problem.hpp"
#include "vrsg/sampling.hpp"

namespace vrsg::testing {

inline Matrix dense(std::initializer_list<std::initializer_list<double>> rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows.begin()->size());
  Matrix m(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index j = 0;
  for (double x : v) out[j++] = x;
  return out;
}

inline Vector gaussian_vector(std::mt19937_64& rng, std::size_t d, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Vector v(ix(d));
  for (auto& x : v) x = nd(rng);
  return v;
}

// Sparse-ish random matrix: each entry kept with probability `density`.
inline Matrix random_matrix(std::mt19937_64& rng, std::size_t n, std::size_t d, double density = 0.6) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> u;
  Matrix m = Matrix::Zero(ix(n), ix(d));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (u(rng) < density) m(i, j) = nd(rng);
    }
  }
  return m;
}

inline Problem random_problem(std::mt19937_64& rng, std::size_t n, std::size_t d, LossKind kind,
                              ProblemSide side, bool with_q = false) {
  const Matrix x = random_matrix(rng, n, d);
  Vector y(ix(n));
  std::normal_distribution<double> nd;
  for (auto& v : y) v = kind == LossKind::Logistic ? (nd(rng) >= 0 ? 1.0 : -1.0) : nd(rng);
  Vector q = with_q ? gaussian_vector(rng, d, 0.1) : Vector::Zero(ix(d));
  return Problem(SparseDesignMatrix::from_dense(x), LossSpec{kind, y}, q, std::move(side));
}

// Feasible random point: scaled inside the l1 ball or uniform in a box.
inline Vector random_feasible(std::mt19937_64& rng, const ConstraintSpec& c, std::size_t d) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (const auto* ball = std::get_if<L1Ball>(&c)) {
    Vector v = gaussian_vector(rng, d);
    return v * (ball->tau * u(rng) / std::max(v.lpNorm<1>(), 1e-300));
  }
  const auto& box = std::get<Box>(c);
  Vector v(ix(d));
  for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = box.lower[j] + u(rng) * (box.upper[j] - box.lower[j]);
  return v;
}

// Threshold oracle for the l1-ball projection: bisection on theta solving
// sum max(|v_j| - theta, 0) = tau.
inline Vector l1_projection_bisection(const Vector& v, double tau) {
  if (v.lpNorm<1>() <= tau) return v;
  double lo = 0.0;
  double hi = v.cwiseAbs().maxCoeff();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double s = (v.cwiseAbs().array() - mid).max(0.0).sum();
    (s > tau ? lo : hi) = mid;
  }
  const double theta = 0.5 * (lo + hi);
  Vector out(v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    out[j] = std::copysign(std::max(std::abs(v[j]) - theta, 0.0), v[j]);
  }
  return out;
}

}  // namespace vrsg::testing
