#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vrsg/problem.hpp"
#include "vrsg/sampling.hpp"

namespace vrsg {

/// Facts about the optimal set shared by every minimizer: the optimal value,
/// r* = X w*, s* = q^T w* (and r(w*) for regularized problems).
struct OptimalFacts {
  double f_star = 0.0;
  Vector r_star;
  double s_star = 0.0;
  double regularizer_star = 0.0;
  Vector grad_h_at_r_star;
  std::vector<Vector> reference_solutions;
  double tolerance_achieved = 0.0;  // worst gradient-mapping norm over the starts
  bool certified = false;
  // Largest pairwise spreads of X w* and q^T w* across reference_solutions.
  double r_spread = 0.0;
  double s_spread = 0.0;

  const Vector& best_solution() const { return reference_solutions.front(); }
  bool shares_invariants(double tolerance = 1e-6) const {
    return r_spread <= tolerance && s_spread <= tolerance;
  }
};

/// Minimizes from three distinct starts with tolerance-driven FISTA until the
/// unit-step gradient mapping is below `tol` (or 1e6 iterations).
OptimalFacts reference_solution(const Problem& problem, double tol,
                                std::size_t max_iterations = 1'000'000);

// 1 / sigma_min(D), i.e. sigma_max((D^T D)^{-1} D^T), for a full-column-rank D.
double pseudo_inverse_norm(const Matrix& d);

inline constexpr std::size_t kHoffmanMaxColumns = 24;
inline constexpr std::uint64_t kHoffmanMaxSubsets = 2'000'000;

/// Upper bound on the Hoffman constant of {C w <= b, X w = r}: the largest
/// sigma_max((D^T D)^{-1} D^T) over all sets D of linearly independent columns
/// of [C^T, X^T]. Rank is tested with relative tolerance 1e-10. Throws
/// BudgetError when the enumeration would exceed the guards.
double hoffman_theta_bound(const Matrix& c, const Vector& b, const Matrix& x);

// Explicit C, b for the l1 ball (2^d sign rows, d <= 4) and for a box.
struct Polyhedron {
  Matrix c;
  Vector b;
};
inline constexpr std::size_t kL1CertificateMaxDim = 4;
Polyhedron polyhedron_of(const ConstraintSpec& constraint, std::size_t d);

double beta_from_constants(double theta, double mu, double m_bound, double grad_h_norm);

struct RateResult {
  double rho = 0.0;
  bool linear = false;  // rho < 1
};
RateResult theoretical_rate(double eta, double m, double l_p, double beta);

struct MuEstimate {
  double value = 0.0;
  bool is_estimate = false;  // true for logistic (grid minimum over reachable margins)
};
MuEstimate mu_estimate(const Problem& problem, const OptimalFacts& facts);

// ||X^T grad h(r*) + q|| * R + (L / 2) * R^2
double gap_bound_formula(double gradient_norm, double radius, double lipschitz);
/// Objective-gap bound over a compact constraint set, with R its diameter and
/// L the exact smoothness constant. Rejects sets of zero diameter.
double bounded_gap_M(const Problem& problem, const OptimalFacts& facts);

struct SscProbeResult {
  double beta_empirical = 0.0;
  Vector worst_case_point;
  std::size_t evaluated = 0;
  std::size_t excluded = 0;  // dist^2 < 1e-16
  std::size_t skipped = 0;   // projection did not converge
  bool passed = false;       // beta_empirical > 0 and skips <= 10%
};

/// Euclidean projection onto the optimal set by Dykstra's alternating
/// projections between the feasible set (or the l1 ball of radius r(w*)/lambda
/// for regularized problems) and the affine set {X w = r*, q^T w = s*}.
struct OptimalSetProjection {
  Vector point;
  std::size_t sweeps = 0;
  bool converged = false;
};
OptimalSetProjection project_onto_optimal_set(const Problem& problem, const OptimalFacts& facts,
                                              const Vector& w, std::size_t max_sweeps = 100'000,
                                              double move_tolerance = 1e-11);

SscProbeResult ssc_probe(const Problem& problem, const OptimalFacts& facts, std::size_t probes,
                         std::uint64_t seed);

/// Monte-Carlo view of the variance-reduced direction at a frozen (w, w_snap).
struct VarianceDiagnostic {
  Vector mean_direction;
  Vector full_gradient;
  double max_standard_errors = 0.0;  // max_j |mean_j - grad_j| / se_j
  double variance = 0.0;             // estimate of E||v - grad f(w)||^2
  double variance_standard_error = 0.0;
  double variance_bound = 0.0;       // 4 L_P (f(w) - f* + f(w_snap) - f*)
};
VarianceDiagnostic variance_diagnostic(const Problem& problem, const SamplingDistribution& dist,
                                       const Vector& w, const Vector& snapshot, double f_star,
                                       std::size_t draws, std::uint64_t seed);

// max over sampled feasible w of
//   (1/n) sum_i ||grad f_i(w) - grad f_i(w*)||^2 / (n p_i) - 2 L_P (f(w) - f*).
double gradient_difference_excess(const Problem& problem, const OptimalFacts& facts,
                                  const std::vector<double>& p, std::size_t probes,
                                  std::uint64_t seed);

struct Constant {
  double value = 0.0;
  std::string provenance = "computed";
};

struct CertificateReport {
  Constant l, l_avg, l_max, l_p;
  Constant theta_bound, mu, m_bound, grad_h_norm, beta;
  Constant rho;
  double eta = 0.0;
  double m = 0.0;
  bool linear_rate_found = false;
  bool mu_is_estimate = false;
  std::vector<std::string> notes;
  OptimalFacts facts;
};

struct CertificateOptions {
  SamplingMode sampling = SamplingMode::LipschitzProportional;
  double max_inner_iterations = 1e7;
  double reference_tolerance = 1e-12;
  std::optional<double> theta, mu, m_bound;  // user-supplied overrides
  Vector initial_point;                      // sublevel anchor for regularized problems
};

/// Composes the Hoffman bound, mu, M, beta, and a grid search over
/// (eta, m) for rho < 1.
CertificateReport certify(const Problem& problem, const CertificateOptions& options);

}  // namespace vrsg
