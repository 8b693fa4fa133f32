#include "vrsg/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "vrsg/errors.hpp"
#include "vrsg/geometry.hpp"
#include "vrsg/solvers.hpp"

namespace vrsg {

namespace {

Vector gaussian_vector(SplitMix64& rng, std::size_t d) {
  std::normal_distribution<double> normal;
  Vector v(ix(d));
  for (std::size_t j = 0; j < d; ++j) v[ix(j)] = normal(rng);
  return v;
}

// A random point of the feasible set (constrained) or of a unit-scale
// neighbourhood of `center` (regularized).
Vector random_feasible_point(const Problem& problem, SplitMix64& rng, const Vector& center) {
  const std::size_t d = problem.d();
  if (!problem.is_constrained()) return center + gaussian_vector(rng, d);
  const auto& c = problem.constraint();
  if (const auto* ball = std::get_if<L1Ball>(&c)) {
    Vector g = gaussian_vector(rng, d);
    const double norm1 = g.lpNorm<1>();
    if (norm1 == 0.0) return Vector::Zero(ix(d));
    return g * (ball->tau * rng.uniform() / norm1);
  }
  const auto& box = std::get<Box>(c);
  Vector w(ix(d));
  for (std::size_t j = 0; j < d; ++j) {
    const double u = rng.uniform();
    w[ix(j)] = box.lower[ix(j)] + u * (box.upper[ix(j)] - box.lower[ix(j)]);
  }
  return w;
}

Vector distinct_start(const Problem& problem, std::uint64_t seed) {
  SplitMix64 rng(seed);
  const Vector g = gaussian_vector(rng, problem.d());
  if (!problem.is_constrained()) return g;
  const auto& c = problem.constraint();
  if (const auto* ball = std::get_if<L1Ball>(&c)) {
    // Scale outside the ball so the projection lands on its boundary.
    const double norm1 = g.lpNorm<1>();
    return project(c, norm1 > 0.0 ? Vector(g * (2.0 * ball->tau / norm1)) : g);
  }
  return random_feasible_point(problem, rng, g);
}

double sigmoid_curvature(double z) {
  const double s = 1.0 / (1.0 + std::exp(-std::abs(z)));
  return s * (1.0 - s);
}

// Min of sigma'(z) / n over a grid of [-bound, bound] including both ends.
double logistic_mu(const Problem& problem, double margin_bound) {
  constexpr int kGrid = 201;
  double lowest = std::numeric_limits<double>::infinity();
  for (int g = 0; g < kGrid; ++g) {
    const double z = -margin_bound + 2.0 * margin_bound * g / (kGrid - 1);
    lowest = std::min(lowest, sigmoid_curvature(z));
  }
  return lowest / static_cast<double>(problem.n());
}

double max_row_inf_norm(const SparseDesignMatrix& x) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.n_rows(); ++i) {
    for (const auto& e : x.row(i)) m = std::max(m, std::abs(e.value));
  }
  return m;
}

// Dense [X; q^T] (the q row only when q != 0) and matching right-hand side.
struct AffineSystem {
  Matrix a;
  Vector c;
};

AffineSystem optimal_affine_system(const Problem& problem, const OptimalFacts& facts) {
  const Matrix x = problem.matrix().to_dense();
  AffineSystem sys;
  if (problem.has_linear_term()) {
    sys.a.resize(x.rows() + 1, x.cols());
    sys.a << x, problem.linear_term().transpose();
    sys.c.resize(x.rows() + 1);
    sys.c << facts.r_star, facts.s_star;
  } else {
    sys.a = x;
    sys.c = facts.r_star;
  }
  return sys;
}

// Projector onto {v : A v = c} in the compressed form v - V (V^T v - z).
class AffineProjector {
 public:
  explicit AffineProjector(const AffineSystem& sys) {
    Eigen::JacobiSVD<Matrix> svd(sys.a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    const double tol = s.size() > 0 ? 1e-10 * std::max(1.0, s[0]) : 0.0;
    Eigen::Index rank = 0;
    while (rank < s.size() && s[rank] > tol) ++rank;
    basis_ = svd.matrixV().leftCols(rank);
    const Vector particular = basis_ * (s.head(rank).cwiseInverse().asDiagonal() *
                                        (svd.matrixU().leftCols(rank).transpose() * sys.c));
    target_ = basis_.transpose() * particular;
  }

  Vector operator()(const Vector& v) const { return v - basis_ * (basis_.transpose() * v - target_); }

 private:
  Matrix basis_;
  Vector target_;
};

// Number of subsets of size 1..k_max of an N-set, saturating at the budget.
std::uint64_t subset_count(std::size_t n_cols, std::size_t k_max, std::uint64_t cap) {
  std::uint64_t total = 0;
  double binom = 1.0;
  for (std::size_t k = 1; k <= k_max; ++k) {
    binom = binom * static_cast<double>(n_cols - k + 1) / static_cast<double>(k);
    total += static_cast<std::uint64_t>(std::llround(binom));
    if (total > cap) return cap + 1;
  }
  return total;
}

}  // namespace

OptimalFacts reference_solution(const Problem& problem, double tol, std::size_t max_iterations) {
  if (!(tol >= 1e-14)) throw InvalidArgument("reference tolerance must be >= 1e-14");
  const std::vector<Vector> starts = {Vector::Zero(ix(problem.d())), distinct_start(problem, 0x51u),
                                      distinct_start(problem, 0xa7u)};
  AfgOptions options;
  options.max_iterations = max_iterations;
  options.gradient_mapping_tolerance = tol;

  std::vector<AfgResult> runs;
  runs.reserve(starts.size());
  for (const auto& s : starts) runs.push_back(afg_minimize(problem, s, options));
  std::stable_sort(runs.begin(), runs.end(),
                   [](const AfgResult& a, const AfgResult& b) { return a.objective < b.objective; });

  OptimalFacts facts;
  facts.certified = true;
  for (const auto& r : runs) {
    facts.reference_solutions.push_back(r.solution);
    facts.tolerance_achieved = std::max(facts.tolerance_achieved, r.gradient_mapping_norm);
    facts.certified = facts.certified && r.converged;
  }
  const Vector& best = facts.reference_solutions.front();
  facts.f_star = eval_objective(problem, best);
  facts.r_star = problem.matrix().multiply(best);
  facts.s_star = problem.linear_term().dot(best);
  facts.regularizer_star = problem.regularizer_value(best);
  facts.grad_h_at_r_star = problem.h_gradient(facts.r_star);

  for (std::size_t a = 0; a < runs.size(); ++a) {
    for (std::size_t b = a + 1; b < runs.size(); ++b) {
      const Vector& wa = facts.reference_solutions[a];
      const Vector& wb = facts.reference_solutions[b];
      facts.r_spread = std::max(facts.r_spread,
                                (problem.matrix().multiply(wa) - problem.matrix().multiply(wb)).norm());
      facts.s_spread = std::max(facts.s_spread, std::abs(problem.linear_term().dot(wa - wb)));
    }
  }
  return facts;
}

double pseudo_inverse_norm(const Matrix& d) {
  Eigen::JacobiSVD<Matrix> svd(d);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[s.size() - 1] <= 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / s[s.size() - 1];
}

double hoffman_theta_bound(const Matrix& c, const Vector& b, const Matrix& x) {
  if (c.rows() != b.size()) throw InvalidArgument("Hoffman bound: C and b row counts differ");
  if (c.rows() > 0 && x.rows() > 0 && c.cols() != x.cols()) {
    throw InvalidArgument("Hoffman bound: C and X column counts differ");
  }
  const Eigen::Index d = c.rows() > 0 ? c.cols() : x.cols();
  const auto n_cols = static_cast<std::size_t>(c.rows() + x.rows());
  if (n_cols > kHoffmanMaxColumns) {
    throw BudgetError("Hoffman enumeration over " + std::to_string(n_cols) +
                      " columns exceeds the limit of " + std::to_string(kHoffmanMaxColumns));
  }
  if (n_cols == 0) throw InvalidArgument("Hoffman bound needs at least one constraint row");
  const std::size_t k_max = std::min(n_cols, static_cast<std::size_t>(d));
  if (subset_count(n_cols, k_max, kHoffmanMaxSubsets) > kHoffmanMaxSubsets) {
    throw BudgetError("Hoffman enumeration would visit more than " +
                      std::to_string(kHoffmanMaxSubsets) + " column subsets");
  }

  Matrix columns(d, static_cast<Eigen::Index>(n_cols));
  if (c.rows() > 0) columns.leftCols(c.rows()) = c.transpose();
  if (x.rows() > 0) columns.rightCols(x.rows()) = x.transpose();

  // Depth-first over index-increasing subsets; supersets of a dependent set
  // are dependent, so those branches are cut.
  double best = 0.0;
  std::vector<Eigen::Index> chosen;
  const auto visit = [&](auto&& self, Eigen::Index next) -> void {
    for (Eigen::Index j = next; j < columns.cols(); ++j) {
      chosen.push_back(j);
      Matrix sub(d, static_cast<Eigen::Index>(chosen.size()));
      for (std::size_t k = 0; k < chosen.size(); ++k) sub.col(ix(k)) = columns.col(chosen[k]);
      Eigen::JacobiSVD<Matrix> svd(sub);
      const auto& s = svd.singularValues();
      const double smax = s[0];
      const double smin = s[s.size() - 1];
      if (smin > 1e-10 * std::max(1.0, smax)) {
        best = std::max(best, 1.0 / smin);
        if (static_cast<Eigen::Index>(chosen.size()) < d) self(self, j + 1);
      }
      chosen.pop_back();
    }
  };
  visit(visit, 0);
  if (!(best > 0.0)) throw InvalidArgument("Hoffman bound: every column is numerically zero");
  return best;
}

Polyhedron polyhedron_of(const ConstraintSpec& constraint, std::size_t d) {
  Polyhedron poly;
  const auto dim = ix(d);
  if (const auto* ball = std::get_if<L1Ball>(&constraint)) {
    if (d > kL1CertificateMaxDim) {
      throw BudgetError("explicit l1-ball description has 2^d rows; certificates support d <= " +
                        std::to_string(kL1CertificateMaxDim) + " (got d = " + std::to_string(d) + ")");
    }
    const Eigen::Index rows = Eigen::Index{1} << dim;
    poly.c.resize(rows, dim);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index j = 0; j < dim; ++j) poly.c(r, j) = ((r >> j) & 1) ? -1.0 : 1.0;
    }
    poly.b = Vector::Constant(rows, ball->tau);
    return poly;
  }
  const auto& box = std::get<Box>(constraint);
  if (box.lower.size() != dim) throw InvalidArgument("box dimension mismatch");
  poly.c.resize(2 * dim, dim);
  poly.c << Matrix::Identity(dim, dim), -Matrix::Identity(dim, dim);
  poly.b.resize(2 * dim);
  poly.b << box.upper, -box.lower;
  return poly;
}

double beta_from_constants(double theta, double mu, double m_bound, double grad_h_norm) {
  if (!(theta > 0.0)) throw InvalidArgument("beta: theta must be positive");
  if (!(mu > 0.0)) throw InvalidArgument("beta: mu must be positive");
  if (!(m_bound > 0.0)) throw InvalidArgument("beta: M must be positive");
  if (!(grad_h_norm >= 0.0)) throw InvalidArgument("beta: ||grad h(r*)|| must be nonnegative");
  return 1.0 / (theta * theta * ((1.0 + 2.0 * grad_h_norm * grad_h_norm) / mu + m_bound));
}

RateResult theoretical_rate(double eta, double m, double l_p, double beta) {
  if (!(l_p > 0.0)) throw InvalidArgument("rate: L_P must be positive");
  if (!(beta > 0.0)) throw InvalidArgument("rate: beta must be positive");
  if (!(m >= 1.0)) throw InvalidArgument("rate: m must be >= 1");
  const double cap = 1.0 / (4.0 * l_p);
  if (!(eta > 0.0) || !(eta < cap)) {
    throw InvalidArgument("rate: step size " + std::to_string(eta) +
                          " is outside (0, 1/(4 L_P)) = (0, " + std::to_string(cap) +
                          ") required for a linear rate");
  }
  const double a = 4.0 * l_p * eta;
  RateResult r;
  r.rho = a * (m + 1.0) / ((1.0 - a) * m) + 1.0 / (beta * eta * (1.0 - a) * m);
  r.linear = r.rho < 1.0;
  return r;
}

MuEstimate mu_estimate(const Problem& problem, const OptimalFacts& /*facts*/) {
  if (problem.loss().kind == LossKind::LeastSquares) {
    return {1.0 / static_cast<double>(problem.n()), false};
  }
  const auto& c = problem.constraint();
  double bound = 0.0;
  if (const auto* ball = std::get_if<L1Ball>(&c)) {
    bound = ball->tau * max_row_inf_norm(problem.matrix());
  } else {
    const auto& box = std::get<Box>(c);
    const auto& x = problem.matrix();
    for (std::size_t i = 0; i < x.n_rows(); ++i) {
      double s = 0.0;
      for (const auto& e : x.row(i)) {
        s += std::abs(e.value) * std::max(std::abs(box.lower[ix(e.index)]), std::abs(box.upper[ix(e.index)]));
      }
      bound = std::max(bound, s);
    }
  }
  return {logistic_mu(problem, bound), true};
}

double gap_bound_formula(double gradient_norm, double radius, double lipschitz) {
  return gradient_norm * radius + 0.5 * lipschitz * radius * radius;
}

double bounded_gap_M(const Problem& problem, const OptimalFacts& facts) {
  if (!problem.is_constrained()) {
    throw InvalidArgument("bounded gap M needs a compact constraint set");
  }
  const double radius = diameter(problem.constraint());
  if (!std::isfinite(radius)) throw InvalidArgument("constraint set is unbounded");
  if (!(radius > 0.0)) throw InvalidArgument("constraint set has zero diameter");
  const Vector g = problem.matrix().transpose_multiply(facts.grad_h_at_r_star) + problem.linear_term();
  return gap_bound_formula(g.norm(), radius, exact_smoothness_constant(problem));
}

OptimalSetProjection project_onto_optimal_set(const Problem& problem, const OptimalFacts& facts,
                                              const Vector& w, std::size_t max_sweeps,
                                              double move_tolerance) {
  const AffineProjector affine(optimal_affine_system(problem, facts));
  double l1_radius = -1.0;  // < 0: no set constraint besides the affine one
  if (!problem.is_constrained()) {
    const double lambda = problem.regularizer().lambda;
    if (lambda > 0.0) l1_radius = facts.regularizer_star / lambda;
  }
  const auto project_set = [&](const Vector& v) -> Vector {
    if (problem.is_constrained()) return project(problem.constraint(), v);
    if (l1_radius < 0.0) return v;
    if (l1_radius == 0.0) return Vector::Zero(v.size());
    return project_l1_ball(v, l1_radius);
  };

  OptimalSetProjection out;
  Vector x = w;
  Vector p = Vector::Zero(w.size());
  Vector q = Vector::Zero(w.size());
  for (std::size_t sweep = 1; sweep <= max_sweeps; ++sweep) {
    const Vector y = project_set(x + p);
    p = x + p - y;
    const Vector x_next = affine(y + q);
    q = y + q - x_next;
    const double move = (x_next - x).norm();
    x = x_next;
    out.sweeps = sweep;
    if (move < move_tolerance) {
      out.converged = true;
      break;
    }
  }
  out.point = x;
  // On the regularized side the optimal set is the l1 sphere of radius r(w*)/lambda
  // within the affine slice; the ball relaxation must come back active.
  if (out.converged && l1_radius > 0.0) {
    out.converged = std::abs(x.lpNorm<1>() - l1_radius) <= 1e-8 * std::max(1.0, l1_radius);
  }
  return out;
}

SscProbeResult ssc_probe(const Problem& problem, const OptimalFacts& facts, std::size_t probes,
                         std::uint64_t seed) {
  if (!facts.certified) throw InvalidArgument("SSC probe needs certified optimal facts");
  if (problem.d() > 50) throw InvalidArgument("SSC probe supports d <= 50");
  if (probes == 0) throw InvalidArgument("SSC probe needs at least one probe");

  SplitMix64 rng(seed);
  const Vector& w_star = facts.best_solution();
  static constexpr double kScales[] = {1e-1, 1e-2, 1e-3};

  SscProbeResult result;
  result.beta_empirical = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < probes; ++k) {
    Vector w;
    if (k % 2 == 0) {
      w = random_feasible_point(problem, rng, w_star);
    } else {
      const double scale = kScales[(k / 2) % 3];
      w = w_star + scale * gaussian_vector(rng, problem.d());
      if (problem.is_constrained()) w = project(problem.constraint(), w);
    }
    const auto proj = project_onto_optimal_set(problem, facts, w);
    if (!proj.converged) {
      ++result.skipped;
      continue;
    }
    const double dist_sq = (w - proj.point).squaredNorm();
    if (dist_sq < 1e-16) {
      ++result.excluded;
      continue;
    }
    ++result.evaluated;
    const double ratio = 2.0 * (eval_objective(problem, w) - facts.f_star) / dist_sq;
    if (ratio < result.beta_empirical) {
      result.beta_empirical = ratio;
      result.worst_case_point = w;
    }
  }
  result.passed = result.evaluated > 0 && result.beta_empirical > 0.0 &&
                  static_cast<double>(result.skipped) <= 0.1 * static_cast<double>(probes);
  return result;
}

VarianceDiagnostic variance_diagnostic(const Problem& problem, const SamplingDistribution& dist,
                                       const Vector& w, const Vector& snapshot, double f_star,
                                       std::size_t draws, std::uint64_t seed) {
  if (draws < 2) throw InvalidArgument("variance diagnostic needs at least two draws");
  SamplingDistribution sampler(dist.probabilities(), seed);
  const auto& x = problem.matrix();
  const double n = static_cast<double>(problem.n());
  const Eigen::Index d = ix(problem.d());

  VarianceDiagnostic out;
  out.full_gradient = eval_full_grad(problem, w);
  const Vector xi = eval_full_grad(problem, snapshot);
  Vector sum = Vector::Zero(d);
  Vector sum_sq = Vector::Zero(d);
  double e_sum = 0.0;
  double e_sum_sq = 0.0;
  for (std::size_t s = 0; s < draws; ++s) {
    const std::size_t i = sampler.draw();
    const double diff = problem.loss_derivative(i, x.row_dot(i, w)) -
                        problem.loss_derivative(i, x.row_dot(i, snapshot));
    Vector v = xi;
    x.add_row_scaled(i, diff / (n * sampler.p(i)), v);
    sum += v;
    sum_sq += v.cwiseProduct(v);
    const double e = (v - out.full_gradient).squaredNorm();
    e_sum += e;
    e_sum_sq += e * e;
  }
  const double k = static_cast<double>(draws);
  out.mean_direction = sum / k;
  for (Eigen::Index j = 0; j < d; ++j) {
    const double var = std::max(0.0, (sum_sq[j] - k * out.mean_direction[j] * out.mean_direction[j]) / (k - 1.0));
    const double se = std::sqrt(var / k);
    const double err = std::abs(out.mean_direction[j] - out.full_gradient[j]);
    const double z = se > 0.0 ? err / se
                              : (err <= 1e-12 * std::max(1.0, std::abs(out.full_gradient[j]))
                                     ? 0.0
                                     : std::numeric_limits<double>::infinity());
    out.max_standard_errors = std::max(out.max_standard_errors, z);
  }
  out.variance = e_sum / k;
  const double e_var = std::max(0.0, (e_sum_sq - k * out.variance * out.variance) / (k - 1.0));
  out.variance_standard_error = std::sqrt(e_var / k);

  const LipschitzInfo info = lipschitz_info(problem);
  const double l_p = aggregate_lipschitz(info, dist.probabilities());
  out.variance_bound = 4.0 * l_p * (eval_objective(problem, w) - f_star +
                                    eval_objective(problem, snapshot) - f_star);
  return out;
}

double gradient_difference_excess(const Problem& problem, const OptimalFacts& facts,
                                  const std::vector<double>& p, std::size_t probes,
                                  std::uint64_t seed) {
  if (!problem.is_constrained()) {
    throw InvalidArgument("gradient-difference bound is stated for constrained problems");
  }
  const LipschitzInfo info = lipschitz_info(problem);
  const double l_p = aggregate_lipschitz(info, p);
  const auto& x = problem.matrix();
  const double n = static_cast<double>(problem.n());
  const Vector& w_star = facts.best_solution();

  SplitMix64 rng(seed);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < probes; ++k) {
    const Vector w = random_feasible_point(problem, rng, w_star);
    double lhs = 0.0;
    for (std::size_t i = 0; i < problem.n(); ++i) {
      const double diff = problem.loss_derivative(i, x.row_dot(i, w)) -
                          problem.loss_derivative(i, facts.r_star[ix(i)]);
      lhs += diff * diff * x.row_sq_norm(i) / (n * p[i]);
    }
    lhs /= n;
    const double rhs = 2.0 * l_p * (eval_objective(problem, w) - facts.f_star);
    worst = std::max(worst, lhs - rhs);
  }
  return worst;
}

namespace {

Constant constant_or_override(std::optional<double> user, double computed) {
  if (user) return {*user, "user-supplied"};
  return {computed, "computed"};
}

}  // namespace

CertificateReport certify(const Problem& problem, const CertificateOptions& options) {
  CertificateReport report;
  report.facts = reference_solution(problem, options.reference_tolerance);
  const OptimalFacts& facts = report.facts;
  if (!facts.certified) {
    report.notes.push_back("reference solution did not reach the requested tolerance");
  }

  const LipschitzInfo info = lipschitz_info(problem);
  const SamplingDistribution dist = build_distribution(options.sampling, info, 0);
  report.l = {exact_smoothness_constant(problem), "computed"};
  report.l_avg = {info.l_avg, "computed"};
  report.l_max = {info.l_max, "computed"};
  report.l_p = {aggregate_lipschitz(info, dist), "computed"};
  report.grad_h_norm = {facts.grad_h_at_r_star.norm(), "computed"};

  double theta = 0.0;
  double mu = 0.0;
  double m_bound = 0.0;
  const Matrix x = problem.matrix().to_dense();
  const std::size_t d = problem.d();
  if (problem.is_constrained()) {
    Matrix eq = x;
    if (problem.has_linear_term()) {
      eq.conservativeResize(x.rows() + 1, Eigen::NoChange);
      eq.row(x.rows()) = problem.linear_term().transpose();
    }
    if (!options.theta) {
      const Polyhedron poly = polyhedron_of(problem.constraint(), d);
      theta = hoffman_theta_bound(poly.c, poly.b, eq);
    }
    const MuEstimate est = mu_estimate(problem, facts);
    mu = est.value;
    report.mu_is_estimate = est.is_estimate;
    if (!options.m_bound) m_bound = bounded_gap_M(problem, facts);
  } else {
    // Regularized: work on the sublevel set {F <= F(w0)}, which lies in the l1
    // ball of radius F(w0) / (lambda - ||q||_inf) because h >= 0 for both losses.
    const double lambda = problem.regularizer().lambda;
    const double q_inf = problem.has_linear_term() ? problem.linear_term().lpNorm<Eigen::Infinity>() : 0.0;
    if (!(lambda > q_inf)) {
      throw InvalidArgument("regularized certificate needs lambda > ||q||_inf for a bounded sublevel set");
    }
    const Vector w0 = options.initial_point.size() == ix(d) ? options.initial_point
                                                         : Vector(Vector::Zero(ix(d)));
    const double f0 = eval_objective(problem, w0);
    const double radius = f0 / (lambda - q_inf);
    report.notes.push_back("regularized problem: M and mu are taken over the sublevel set of the "
                           "initial point (l1 radius " + std::to_string(radius) + ")");
    if (!options.theta) {
      // Epigraph form in (w, t): sign rows [s, -1] w.r.t. t >= ||w||_1, with the
      // equality rows [X, 0] and [q, 1].
      if (d > kL1CertificateMaxDim) {
        throw BudgetError("epigraph of the l1 norm has 2^d facets; certificates support d <= " +
                          std::to_string(kL1CertificateMaxDim));
      }
      const auto dim = ix(d);
      const Eigen::Index rows = Eigen::Index{1} << dim;
      Matrix c(rows, dim + 1);
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index j = 0; j < dim; ++j) c(r, j) = ((r >> j) & 1) ? -1.0 : 1.0;
        c(r, dim) = -1.0;
      }
      Matrix eq = Matrix::Zero(x.rows() + 1, dim + 1);
      eq.topLeftCorner(x.rows(), dim) = x;
      eq.block(x.rows(), 0, 1, dim) = problem.linear_term().transpose();
      eq(x.rows(), dim) = 1.0;
      theta = hoffman_theta_bound(c, Vector::Zero(rows), eq);
    }
    if (problem.loss().kind == LossKind::LeastSquares) {
      mu = 1.0 / static_cast<double>(problem.n());
    } else {
      mu = logistic_mu(problem, radius * max_row_inf_norm(problem.matrix()));
      report.mu_is_estimate = true;
    }
    m_bound = f0 - facts.f_star;
    if (!(m_bound > 0.0)) {
      throw InvalidArgument("initial point is already optimal; the sublevel gap bound is zero");
    }
  }
  report.theta_bound = constant_or_override(options.theta, theta);
  report.mu = constant_or_override(options.mu, mu);
  report.m_bound = constant_or_override(options.m_bound, m_bound);
  report.beta = {beta_from_constants(report.theta_bound.value, report.mu.value,
                                     report.m_bound.value, report.grad_h_norm.value),
                 "computed"};

  // Grid over eta = gamma / L_P and geometric m; keep the point with the best
  // contraction per gradient evaluation, log(rho) / (n + 2m).
  const double l_p = report.l_p.value;
  const double n = static_cast<double>(problem.n());
  double best_score = std::numeric_limits<double>::infinity();
  double best_rho = std::numeric_limits<double>::infinity();
  for (int g = 1; g <= 49; ++g) {
    const double gamma = 0.005 * g;
    const double eta = gamma / l_p;
    for (double m = 1.0; m <= options.max_inner_iterations; m = std::ceil(m * 1.1)) {
      const RateResult r = theoretical_rate(eta, m, l_p, report.beta.value);
      if (r.linear) {
        const double score = std::log(r.rho) / (n + 2.0 * m);
        if (!report.linear_rate_found || score < best_score) {
          best_score = score;
          report.linear_rate_found = true;
          report.rho = {r.rho, "computed"};
          report.eta = eta;
          report.m = m;
        }
      } else if (!report.linear_rate_found && r.rho < best_rho) {
        best_rho = r.rho;
        report.rho = {r.rho, "computed"};
        report.eta = eta;
        report.m = m;
      }
    }
  }
  return report;
}

}  // namespace vrsg
