#include "vrsg/solvers.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "vrsg/errors.hpp"
#include "vrsg/geometry.hpp"

namespace vrsg {

void SolverConfig::validate() const {
  if (epochs < 1) throw InvalidArgument("epochs must be >= 1");
  if (inner_iterations < 1) throw InvalidArgument("inner_iterations must be >= 1");
  if (!(step_size > 0.0) || !std::isfinite(step_size)) {
    throw InvalidArgument("step_size must be positive and finite");
  }
  if (!(sgd_initial_step > 0.0) || !std::isfinite(sgd_initial_step)) {
    throw InvalidArgument("sgd_initial_step must be positive and finite");
  }
}

namespace {

using Clock = std::chrono::steady_clock;

class TraceRecorder {
 public:
  TraceRecorder(const Problem& problem, const SolverConfig& config)
      : problem_(problem), config_(config), start_(Clock::now()) {}

  double record(RunTrace& trace, std::size_t epoch, std::uint64_t grad_evals,
                std::uint64_t probe_evals, const Vector& w) {
    TraceRow row;
    row.epoch = epoch;
    row.grad_evals = grad_evals;
    row.probe_evals = probe_evals;
    row.objective = eval_objective(problem_, w);
    if (config_.reference_objective) row.gap = row.objective - *config_.reference_objective;
    row.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
    if (trace.rows.empty()) {
      initial_ = row.objective;
    } else {
      check_divergence(epoch, row.objective);
    }
    trace.rows.push_back(row);
    return row.objective;
  }

 private:
  // Abort when the objective turns non-finite or exceeds 1e3 times its start.
  void check_divergence(std::size_t epoch, double value) const {
    if (!std::isfinite(value)) throw DivergenceError(epoch, "objective is not finite");
    const double limit = 1e3 * std::max(std::abs(initial_), 1.0);
    if (value > limit) {
      throw DivergenceError(epoch, "objective " + std::to_string(value) + " exceeds " +
                                       std::to_string(limit));
    }
  }

  const Problem& problem_;
  const SolverConfig& config_;
  Clock::time_point start_;
  double initial_ = 0.0;
};

Vector feasible_start(const Problem& problem, const SolverConfig& config, const Vector& w0) {
  if (static_cast<std::size_t>(w0.size()) != problem.d()) {
    throw InvalidArgument("initial point has length " + std::to_string(w0.size()) +
                          ", expected d = " + std::to_string(problem.d()));
  }
  if (!w0.allFinite()) throw InvalidArgument("initial point has non-finite entries");
  if (!problem.is_constrained()) return w0;
  if (is_feasible(problem.constraint(), w0, 1e-12)) return w0;
  if (config.strict_feasibility) throw InvalidArgument("initial point is infeasible");
  return project(problem.constraint(), w0);
}

// One projected/proximal SGD step per iteration, counter k continuing from `k`.
void sgd_iterations(const Problem& problem, Vector& w, double eta0, std::size_t count,
                    SamplingDistribution& dist, std::uint64_t& k) {
  const auto& x = problem.matrix();
  for (std::size_t s = 0; s < count; ++s) {
    ++k;
    const double eta = sgd_step_size(eta0, k);
    const std::size_t i = dist.draw();
    const double deriv = problem.loss_derivative(i, x.row_dot(i, w));
    Vector point = w;
    if (problem.has_linear_term()) point -= eta * problem.linear_term();
    x.add_row_scaled(i, -eta * deriv, point);
    w = proximal_step(problem, point, eta);
  }
}

RunTrace variance_reduced(const Problem& problem, const SolverConfig& config, const Vector& w0) {
  config.validate();
  const auto& x = problem.matrix();
  const std::size_t n = problem.n();
  const std::size_t m = config.inner_iterations;
  const double eta = config.step_size;

  const LipschitzInfo info = lipschitz_info(problem);
  SamplingDistribution dist = build_distribution(config.sampling, info, config.seed);

  RunTrace trace;
  trace.l_p = aggregate_lipschitz(info, dist);
  trace.step_above_theory = eta >= 1.0 / (4.0 * trace.l_p);

  TraceRecorder recorder(problem, config);
  Vector snapshot = feasible_start(problem, config, w0);
  recorder.record(trace, 0, 0, 0, snapshot);

  const double inv_n = 1.0 / static_cast<double>(n);
  std::uint64_t evals = 0;
  Vector w(snapshot.size());
  Vector sum(snapshot.size());
  Vector point(snapshot.size());
  for (std::size_t k = 1; k <= config.epochs; ++k) {
    const Vector xi = eval_full_grad(problem, snapshot);
    w = snapshot;
    sum.setZero();
    for (std::size_t t = 0; t < m; ++t) {
      const std::size_t i = dist.draw();
      // The q term is common to both component gradients and cancels.
      const double diff = problem.loss_derivative(i, x.row_dot(i, w)) -
                          problem.loss_derivative(i, x.row_dot(i, snapshot));
      point = w - eta * xi;
      x.add_row_scaled(i, -eta * diff * inv_n / dist.p(i), point);
      w = proximal_step(problem, point, eta);
      sum += w;
    }
    snapshot = config.epoch_output == EpochOutput::Average ? Vector(sum / static_cast<double>(m)) : w;
    evals += n + 2 * m;
    recorder.record(trace, k, evals, 0, snapshot);
  }
  trace.final_iterate = snapshot;
  return trace;
}

// FISTA with backtracking on L (halve on entry, double until the quadratic
// upper bound holds) and a restart that rejects any step raising F.
class Fista {
 public:
  Fista(const Problem& problem, const Vector& start, double initial_lipschitz)
      : problem_(problem), x_(start), y_(start) {
    lipschitz_ = initial_lipschitz > 0.0 ? initial_lipschitz : 1.0;
    fx_ = eval_objective(problem_, x_);
  }

  void step() {
    const Vector g = eval_full_grad(problem_, y_);
    grad_evals_ += problem_.n();
    const Vector margins_y = problem_.matrix().multiply(y_);
    probe_evals_ += problem_.n();

    lipschitz_ *= 0.5;
    Vector z;
    for (int doublings = 0;; ++doublings) {
      z = proximal_step(problem_, y_ - g / lipschitz_, 1.0 / lipschitz_);
      const Vector dz = z - y_;
      const double quad = 0.5 * lipschitz_ * dz.squaredNorm();
      probe_evals_ += problem_.n();
      if (bregman(margins_y, dz) <= quad * (1.0 + 1e-12)) break;
      if (doublings + 1 >= 60) {
        throw StagnationError("line search failed after 60 consecutive step halvings");
      }
      lipschitz_ *= 2.0;
    }

    const double Fz = eval_objective(problem_, z);
    // A plain proximal step from x can only look worse through rounding.
    const bool from_x = t_ == 1.0 && y_ == x_;
    if (!(Fz <= fx_) && !from_x) {
      y_ = x_;
      t_ = 1.0;
      ++restarts_;
      return;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_ * t_));
    y_ = z + ((t_ - 1.0) / t_next) * (z - x_);
    x_ = std::move(z);
    fx_ = Fz;
    t_ = t_next;
  }

  const Vector& iterate() const noexcept { return x_; }
  double objective() const noexcept { return fx_; }
  std::uint64_t grad_evals() const noexcept { return grad_evals_; }
  std::uint64_t probe_evals() const noexcept { return probe_evals_; }

 private:
  const Problem& problem_;
  Vector x_;
  Vector y_;
  double fx_ = 0.0;
  double t_ = 1.0;
  double lipschitz_ = 1.0;
  std::uint64_t grad_evals_ = 0;
  std::uint64_t probe_evals_ = 0;
  std::uint64_t restarts_ = 0;

  // f(y + dz) - f(y) - <grad f(y), dz> from the margin increments, which keeps
  // the line-search test meaningful once steps are below rounding of f.
  double bregman(const Vector& margins_y, const Vector& dz) const {
    const Vector delta = problem_.matrix().multiply(dz);
    double s = 0.0;
    for (std::size_t i = 0; i < problem_.n(); ++i) {
      const double d = delta[ix(i)];
      if (problem_.loss().kind == LossKind::LeastSquares) {
        s += 0.5 * d * d;
        continue;
      }
      const double m = margins_y[ix(i)];
      if (std::abs(d) < 1e-3) {
        const double c2 = problem_.loss_curvature(i, m);
        const double sg = 1.0 / (1.0 + std::exp(-problem_.loss().labels[ix(i)] * m));
        const double c3 = problem_.loss().labels[ix(i)] * c2 * (1.0 - 2.0 * sg);
        s += 0.5 * c2 * d * d + c3 * d * d * d / 6.0;
      } else {
        s += problem_.loss_value(i, m + d) - problem_.loss_value(i, m) - problem_.loss_derivative(i, m) * d;
      }
    }
    return s / static_cast<double>(problem_.n());
  }
};

double initial_afg_lipschitz(const Problem& problem) {
  const double l = lipschitz_info(problem).l_global_bound;
  return l > 0.0 ? l : 1.0;
}

}  // namespace

double sgd_step_size(double eta0, std::uint64_t k) {
  return eta0 / std::sqrt(static_cast<double>(k));
}

RunTrace run_vrpsg(const Problem& problem, const SolverConfig& config, const Vector& w0) {
  if (!problem.is_constrained()) throw InvalidArgument("VRPSG requires a constrained problem");
  return variance_reduced(problem, config, w0);
}

RunTrace run_prox_svrg(const Problem& problem, const SolverConfig& config, const Vector& w0) {
  if (problem.is_constrained()) throw InvalidArgument("Prox-SVRG requires a regularized problem");
  return variance_reduced(problem, config, w0);
}

RunTrace run_projected_sgd(const Problem& problem, const SolverConfig& config, const Vector& w0) {
  config.validate();
  const LipschitzInfo info = lipschitz_info(problem);
  SamplingDistribution dist = build_distribution(SamplingMode::Uniform, info, config.seed);

  RunTrace trace;
  trace.l_p = aggregate_lipschitz(info, dist);
  TraceRecorder recorder(problem, config);
  Vector w = feasible_start(problem, config, w0);
  recorder.record(trace, 0, 0, 0, w);
  std::uint64_t k = 0;
  for (std::size_t pass = 1; pass <= config.epochs; ++pass) {
    sgd_iterations(problem, w, config.sgd_initial_step, problem.n(), dist, k);
    recorder.record(trace, pass, k, 0, w);
  }
  trace.final_iterate = w;
  return trace;
}

RunTrace run_afg(const Problem& problem, const SolverConfig& config, const Vector& w0) {
  config.validate();
  RunTrace trace;
  TraceRecorder recorder(problem, config);
  const Vector start = feasible_start(problem, config, w0);
  Fista fista(problem, start, initial_afg_lipschitz(problem));
  recorder.record(trace, 0, 0, 0, start);
  for (std::size_t k = 1; k <= config.epochs; ++k) {
    fista.step();
    recorder.record(trace, k, fista.grad_evals(), fista.probe_evals(), fista.iterate());
  }
  trace.final_iterate = fista.iterate();
  return trace;
}

RunTrace run_hybrid_vrpsg2(const Problem& problem, const SolverConfig& config, const Vector& w0) {
  config.validate();
  if (!problem.is_constrained()) throw InvalidArgument("VRPSG2 requires a constrained problem");
  const LipschitzInfo info = lipschitz_info(problem);
  // The SGD pass draws from a child stream so the VRPSG phase sees exactly the
  // indices a standalone run with the same seed would.
  SplitMix64 parent(config.seed);
  SamplingDistribution sgd_dist =
      build_distribution(SamplingMode::Uniform, info, parent.split().state());

  const auto start_time = Clock::now();
  RunTrace head;
  TraceRecorder recorder(problem, config);
  Vector w = feasible_start(problem, config, w0);
  recorder.record(head, 0, 0, 0, w);
  std::uint64_t k = 0;
  sgd_iterations(problem, w, config.sgd_initial_step, problem.n(), sgd_dist, k);
  recorder.record(head, 1, k, 0, w);
  const double sgd_ms = std::chrono::duration<double, std::milli>(Clock::now() - start_time).count();

  RunTrace tail = run_vrpsg(problem, config, w);
  RunTrace trace;
  trace.rows = head.rows;
  for (std::size_t r = 1; r < tail.rows.size(); ++r) {
    TraceRow row = tail.rows[r];
    row.epoch += 1;
    row.grad_evals += problem.n();
    row.wall_ms += sgd_ms;
    trace.rows.push_back(row);
  }
  trace.final_iterate = tail.final_iterate;
  trace.l_p = tail.l_p;
  trace.step_above_theory = tail.step_above_theory;
  return trace;
}

double gradient_mapping_norm(const Problem& problem, const Vector& w) {
  const Vector g = eval_full_grad(problem, w);
  return (w - proximal_step(problem, w - g, 1.0)).norm();
}

AfgResult afg_minimize(const Problem& problem, const Vector& w0, const AfgOptions& options) {
  SolverConfig cfg;
  const Vector start = feasible_start(problem, cfg, w0);
  Fista fista(problem, start,
              options.initial_lipschitz > 0.0 ? options.initial_lipschitz
                                              : initial_afg_lipschitz(problem));
  AfgResult result;
  for (std::size_t k = 1; k <= options.max_iterations; ++k) {
    fista.step();
    result.iterations = k;
    if (options.gradient_mapping_tolerance > 0.0) {
      result.gradient_mapping_norm = gradient_mapping_norm(problem, fista.iterate());
      if (result.gradient_mapping_norm <= options.gradient_mapping_tolerance) {
        result.converged = true;
        break;
      }
    }
  }
  if (options.gradient_mapping_tolerance <= 0.0) {
    result.gradient_mapping_norm = gradient_mapping_norm(problem, fista.iterate());
  }
  result.solution = fista.iterate();
  result.objective = fista.objective();
  return result;
}

}  // namespace vrsg
