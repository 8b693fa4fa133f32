#include "vrsg/problem.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vrsg/errors.hpp"
#include "vrsg/sampling.hpp"

namespace vrsg {

namespace {

// log(1 + exp(-z)) without overflow.
double log1p_exp_neg(double z) {
  if (z >= 0.0) return std::log1p(std::exp(-z));
  return -z + std::log1p(std::exp(z));
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

void validate_side(const ProblemSide& side, std::size_t d) {
  if (const auto* c = std::get_if<ConstraintSpec>(&side)) {
    if (const auto* ball = std::get_if<L1Ball>(c)) {
      if (!(ball->tau > 0.0) || !std::isfinite(ball->tau)) {
        throw InvalidArgument("l1 ball radius must be positive and finite");
      }
    } else {
      const auto& box = std::get<Box>(*c);
      if (static_cast<std::size_t>(box.lower.size()) != d ||
          static_cast<std::size_t>(box.upper.size()) != d) {
        throw InvalidArgument("box bounds must have length d = " + std::to_string(d));
      }
      for (Eigen::Index j = 0; j < box.lower.size(); ++j) {
        if (std::isnan(box.lower[j]) || std::isnan(box.upper[j]) || box.lower[j] > box.upper[j]) {
          throw InvalidArgument("box bounds require lower <= upper at coordinate " +
                                std::to_string(j));
        }
      }
    }
  } else {
    const auto& reg = std::get<RegularizerSpec>(side);
    if (!(reg.lambda >= 0.0) || !std::isfinite(reg.lambda)) {
      throw InvalidArgument("l1 regularization weight must be nonnegative and finite");
    }
  }
}

}  // namespace

Problem::Problem(SparseDesignMatrix matrix, LossSpec loss, Vector linear_term, ProblemSide side)
    : matrix_(std::move(matrix)), loss_(std::move(loss)), q_(std::move(linear_term)),
      side_(std::move(side)) {
  if (matrix_.n_rows() == 0) throw InvalidArgument("problem needs at least one component");
  if (static_cast<std::size_t>(loss_.labels.size()) != matrix_.n_rows()) {
    throw InvalidArgument("label count " + std::to_string(loss_.labels.size()) +
                          " != number of rows " + std::to_string(matrix_.n_rows()));
  }
  if (static_cast<std::size_t>(q_.size()) != matrix_.n_cols()) {
    throw InvalidArgument("linear term length " + std::to_string(q_.size()) + " != d = " +
                          std::to_string(matrix_.n_cols()));
  }
  for (Eigen::Index i = 0; i < loss_.labels.size(); ++i) {
    const double y = loss_.labels[i];
    if (!std::isfinite(y)) throw InvalidArgument("non-finite label at row " + std::to_string(i));
    if (loss_.kind == LossKind::Logistic && y != 1.0 && y != -1.0) {
      throw InvalidArgument("logistic labels must be +1 or -1 (row " + std::to_string(i) + ")");
    }
  }
  if (!q_.allFinite()) throw InvalidArgument("linear term has non-finite entries");
  has_q_ = q_.size() > 0 && q_.cwiseAbs().maxCoeff() != 0.0;
  validate_side(side_, matrix_.n_cols());
}

Problem::Problem(SparseDesignMatrix matrix, LossSpec loss, ProblemSide side)
    : Problem(matrix, std::move(loss), Vector::Zero(ix(matrix.n_cols())), std::move(side)) {}

const ConstraintSpec& Problem::constraint() const {
  if (!is_constrained()) throw InvalidArgument("problem is regularized, not constrained");
  return std::get<ConstraintSpec>(side_);
}

const RegularizerSpec& Problem::regularizer() const {
  if (is_constrained()) throw InvalidArgument("problem is constrained, not regularized");
  return std::get<RegularizerSpec>(side_);
}

double Problem::loss_value(std::size_t i, double margin) const {
  const double y = loss_.labels[ix(i)];
  if (loss_.kind == LossKind::LeastSquares) {
    const double r = margin - y;
    return 0.5 * r * r;
  }
  return log1p_exp_neg(y * margin);
}

double Problem::loss_derivative(std::size_t i, double margin) const {
  const double y = loss_.labels[ix(i)];
  if (loss_.kind == LossKind::LeastSquares) return margin - y;
  return -y * sigmoid(-y * margin);
}

double Problem::loss_curvature(std::size_t i, double margin) const {
  if (loss_.kind == LossKind::LeastSquares) return 1.0;
  const double s = sigmoid(loss_.labels[ix(i)] * margin);
  return s * (1.0 - s);
}

void Problem::check_dim(const Vector& w, const char* what) const {
  if (static_cast<std::size_t>(w.size()) != d()) {
    throw InvalidArgument(std::string(what) + ": vector length " + std::to_string(w.size()) +
                          " != d = " + std::to_string(d()));
  }
}

double Problem::h_value(const Vector& u) const {
  if (static_cast<std::size_t>(u.size()) != n()) throw InvalidArgument("h: length != n");
  double s = 0.0;
  for (std::size_t i = 0; i < n(); ++i) s += loss_value(i, u[ix(i)]);
  return s / static_cast<double>(n());
}

Vector Problem::h_gradient(const Vector& u) const {
  if (static_cast<std::size_t>(u.size()) != n()) throw InvalidArgument("grad h: length != n");
  Vector g(ix(n()));
  for (std::size_t i = 0; i < n(); ++i) {
    g[ix(i)] = loss_derivative(i, u[ix(i)]) / static_cast<double>(n());
  }
  return g;
}

double Problem::smooth_value(const Vector& w) const {
  check_dim(w, "objective");
  double s = 0.0;
  for (std::size_t i = 0; i < n(); ++i) s += loss_value(i, matrix_.row_dot(i, w));
  s /= static_cast<double>(n());
  if (has_q_) s += q_.dot(w);
  return s;
}

double Problem::regularizer_value(const Vector& w) const {
  if (is_constrained()) return 0.0;
  return std::get<RegularizerSpec>(side_).lambda * w.lpNorm<1>();
}

double Problem::component_value(std::size_t i, const Vector& w) const {
  check_dim(w, "component value");
  if (i >= n()) throw InvalidArgument("component index out of range");
  double v = loss_value(i, matrix_.row_dot(i, w));
  if (has_q_) v += q_.dot(w);
  return v;
}

double eval_objective(const Problem& problem, const Vector& w) {
  return problem.smooth_value(w) + problem.regularizer_value(w);
}

Vector eval_component_grad(const Problem& problem, std::size_t i, const Vector& w) {
  if (i >= problem.n()) {
    throw InvalidArgument("component index " + std::to_string(i) + " out of range (n = " +
                          std::to_string(problem.n()) + ")");
  }
  if (static_cast<std::size_t>(w.size()) != problem.d()) {
    throw InvalidArgument("component gradient: vector length != d");
  }
  Vector g = problem.linear_term();
  const double deriv = problem.loss_derivative(i, problem.matrix().row_dot(i, w));
  problem.matrix().add_row_scaled(i, deriv, g);
  return g;
}

Vector eval_full_grad(const Problem& problem, const Vector& w) {
  if (static_cast<std::size_t>(w.size()) != problem.d()) {
    throw InvalidArgument("full gradient: vector length != d");
  }
  const auto& x = problem.matrix();
  Vector g = Vector::Zero(ix(problem.d()));
  for (std::size_t i = 0; i < problem.n(); ++i) {
    x.add_row_scaled(i, problem.loss_derivative(i, x.row_dot(i, w)), g);
  }
  g /= static_cast<double>(problem.n());
  if (problem.has_linear_term()) g += problem.linear_term();
  return g;
}

ComponentLipschitz component_lipschitz(const Problem& problem, std::size_t i) {
  if (i >= problem.n()) throw InvalidArgument("component index out of range");
  const double sq = problem.matrix().row_sq_norm(i);
  if (sq == 0.0) return {0.0, true};
  return {problem.loss().kind == LossKind::Logistic ? sq / 4.0 : sq, false};
}

double power_iteration_sq_sigma_max(const SparseDesignMatrix& x, int max_iterations,
                                    double tolerance) {
  const auto d = ix(x.n_cols());
  if (d == 0 || x.nnz() == 0) return 0.0;
  Vector v(d);
  for (Eigen::Index j = 0; j < d; ++j) v[j] = 1.0 + 0.25 * static_cast<double>(j % 5);
  v.normalize();
  double estimate = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    Vector u = x.transpose_multiply(x.multiply(v));
    const double next = v.dot(u);  // Rayleigh quotient, never above the true value
    const double norm = u.norm();
    if (norm == 0.0) return 0.0;
    v = u / norm;
    const bool done = it > 0 && std::abs(next - estimate) <= tolerance * std::abs(next);
    estimate = next;
    if (done) break;
  }
  return estimate;
}

double exact_smoothness_constant(const Problem& problem) {
  const Matrix dense = problem.matrix().to_dense();
  const Matrix gram = dense.transpose() * dense;
  double lam = 0.0;
  if (gram.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(gram, Eigen::EigenvaluesOnly);
    lam = std::max(0.0, solver.eigenvalues().maxCoeff());
  }
  const double scale = problem.loss().kind == LossKind::Logistic ? 4.0 : 1.0;
  return lam / (scale * static_cast<double>(problem.n()));
}

LipschitzInfo lipschitz_info(const Problem& problem) {
  LipschitzInfo info;
  const std::size_t n = problem.n();
  info.per_component.resize(n);
  info.degenerate.resize(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = component_lipschitz(problem, i);
    info.per_component[i] = c.value;
    info.degenerate[i] = c.degenerate;
    sum += c.value;
    info.l_max = std::max(info.l_max, c.value);
  }
  info.l_avg = sum / static_cast<double>(n);
  const double scale = problem.loss().kind == LossKind::Logistic ? 4.0 : 1.0;
  info.l_global_bound =
      power_iteration_sq_sigma_max(problem.matrix()) / (scale * static_cast<double>(n));
  return info;
}

double aggregate_lipschitz(const LipschitzInfo& info, const std::vector<double>& p) {
  if (p.size() != info.size()) {
    throw InvalidDistribution("distribution has " + std::to_string(p.size()) +
                              " entries, expected " + std::to_string(info.size()));
  }
  const double n = static_cast<double>(info.size());
  double lp = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double li = info.per_component[i];
    if (li == 0.0) continue;
    if (!(p[i] > 0.0)) {
      throw InvalidDistribution("p_" + std::to_string(i) + " = 0 but L_" + std::to_string(i) +
                                " > 0");
    }
    lp = std::max(lp, li / (n * p[i]));
  }
  return lp;
}

double aggregate_lipschitz(const LipschitzInfo& info, const SamplingDistribution& dist) {
  return aggregate_lipschitz(info, dist.probabilities());
}

}  // namespace vrsg
