#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "vrsg/sparse_matrix.hpp"

namespace vrsg {

inline Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

enum class LossKind { LeastSquares, Logistic };

struct LossSpec {
  LossKind kind = LossKind::LeastSquares;
  Vector labels;
};

struct L1Ball {
  double tau = 1.0;
};

struct Box {
  Vector lower;
  Vector upper;
};

using ConstraintSpec = std::variant<L1Ball, Box>;

struct L1Regularizer {
  double lambda = 0.0;
};

using RegularizerSpec = L1Regularizer;

// Constrained: min_{w in W} f(w).  Regularized: min_w f(w) + r(w).
using ProblemSide = std::variant<ConstraintSpec, RegularizerSpec>;

struct LipschitzInfo {
  std::vector<double> per_component;
  std::vector<bool> degenerate;  // L_i == 0 (zero row)
  double l_avg = 0.0;
  double l_max = 0.0;
  double l_global_bound = 0.0;  // estimate of L for grad f, never above l_avg

  std::size_t size() const noexcept { return per_component.size(); }
};

/// f(w) = (1/n) sum_i f_i(w) with f_i(w) = loss(x_i^T w, y_i) + q^T w.
///
/// The linear term is carried by every component so that the full gradient is
/// exactly the mean of the component gradients. Immutable after construction.
class Problem {
 public:
  Problem(SparseDesignMatrix matrix, LossSpec loss, Vector linear_term, ProblemSide side);
  Problem(SparseDesignMatrix matrix, LossSpec loss, ProblemSide side);

  const SparseDesignMatrix& matrix() const noexcept { return matrix_; }
  const LossSpec& loss() const noexcept { return loss_; }
  const Vector& linear_term() const noexcept { return q_; }
  bool has_linear_term() const noexcept { return has_q_; }
  const ProblemSide& side() const noexcept { return side_; }

  std::size_t n() const noexcept { return matrix_.n_rows(); }
  std::size_t d() const noexcept { return matrix_.n_cols(); }

  bool is_constrained() const noexcept { return std::holds_alternative<ConstraintSpec>(side_); }
  const ConstraintSpec& constraint() const;
  const RegularizerSpec& regularizer() const;

  // Scalar derivative of the loss with respect to the margin z = x_i^T w.
  double loss_derivative(std::size_t i, double margin) const;
  double loss_value(std::size_t i, double margin) const;
  // Second derivative of the loss in the margin; used by the strong-convexity probe.
  double loss_curvature(std::size_t i, double margin) const;

  double smooth_value(const Vector& w) const;      // f(w)
  double regularizer_value(const Vector& w) const; // r(w), 0 when constrained
  double component_value(std::size_t i, const Vector& w) const;

  // h(u) and its gradient, where f(w) = h(Xw) + q^T w.
  double h_value(const Vector& u) const;
  Vector h_gradient(const Vector& u) const;

 private:
  void check_dim(const Vector& w, const char* what) const;

  SparseDesignMatrix matrix_;
  LossSpec loss_;
  Vector q_;
  bool has_q_ = false;
  ProblemSide side_;
};

/// f(w) for constrained problems, F(w) = f(w) + r(w) for regularized ones.
/// Feasibility is not checked.
double eval_objective(const Problem& problem, const Vector& w);
Vector eval_component_grad(const Problem& problem, std::size_t i, const Vector& w);
Vector eval_full_grad(const Problem& problem, const Vector& w);

struct ComponentLipschitz {
  double value = 0.0;
  bool degenerate = false;
};
ComponentLipschitz component_lipschitz(const Problem& problem, std::size_t i);

// Largest eigenvalue of X^T X by power iteration from a fixed start.
double power_iteration_sq_sigma_max(const SparseDesignMatrix& x, int max_iterations = 50,
                                    double tolerance = 1e-8);
// Exact Lipschitz constant of grad f from a dense eigen-decomposition of X^T X.
double exact_smoothness_constant(const Problem& problem);

LipschitzInfo lipschitz_info(const Problem& problem);

class SamplingDistribution;
/// L_P = max_i L_i / (n p_i).
double aggregate_lipschitz(const LipschitzInfo& info, const SamplingDistribution& dist);
double aggregate_lipschitz(const LipschitzInfo& info, const std::vector<double>& p);

}  // namespace vrsg
