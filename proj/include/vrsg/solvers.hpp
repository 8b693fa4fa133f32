#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "vrsg/problem.hpp"
#include "vrsg/sampling.hpp"

namespace vrsg {

enum class EpochOutput { Average, LastIterate };

struct SolverConfig {
  std::size_t epochs = 10;            // K (outer iterations, SGD passes, AFG iterations)
  std::size_t inner_iterations = 1;   // m
  double step_size = 0.1;             // eta
  double sgd_initial_step = 1.0;      // eta_0, step k uses eta_0 / sqrt(k)
  std::uint64_t seed = 1;
  SamplingMode sampling = SamplingMode::LipschitzProportional;
  EpochOutput epoch_output = EpochOutput::Average;
  bool strict_feasibility = false;    // reject infeasible w0 instead of projecting it
  std::optional<double> reference_objective;  // f*, fills the gap column

  void validate() const;
};

struct TraceRow {
  std::size_t epoch = 0;
  std::uint64_t grad_evals = 0;   // cumulative component-gradient evaluations
  std::uint64_t probe_evals = 0;  // cumulative line-search function probes (AFG), in component units
  double objective = 0.0;
  std::optional<double> gap;
  double wall_ms = 0.0;
};

struct RunTrace {
  std::vector<TraceRow> rows;
  Vector final_iterate;
  double l_p = 0.0;              // aggregate Lipschitz constant of the sampling used, 0 if n/a
  bool step_above_theory = false;  // eta >= 1 / (4 L_P)
};

/// Variance-reduced projected stochastic gradient on a constrained problem.
///
/// Each epoch takes one full gradient at the snapshot and `m` inner steps with
/// v = (grad f_i(w) - grad f_i(w_snap)) / (n p_i) + full_grad(w_snap), so its
/// cost is n + 2m component gradients. The snapshot is replaced by the mean of
/// the inner iterates (or the last one when configured).
RunTrace run_vrpsg(const Problem& problem, const SolverConfig& config, const Vector& w0);

/// Same scheme with the l1 proximal step in place of the projection.
RunTrace run_prox_svrg(const Problem& problem, const SolverConfig& config, const Vector& w0);

/// Projected SGD with uniform sampling and eta_k = eta_0 / sqrt(k). The
/// iteration counter runs across passes; one trace row per pass of n steps.
RunTrace run_projected_sgd(const Problem& problem, const SolverConfig& config, const Vector& w0);

// eta_0 / sqrt(k), k counted from 1.
double sgd_step_size(double eta0, std::uint64_t k);

/// Accelerated proximal/projected full gradient (FISTA) with backtracking and
/// a monotone function-value restart. `epochs` is the iteration count.
RunTrace run_afg(const Problem& problem, const SolverConfig& config, const Vector& w0);

/// One SGD pass (n steps) followed by VRPSG started at the SGD output.
/// Trace rows: start, end of the SGD pass, then one per VRPSG epoch.
RunTrace run_hybrid_vrpsg2(const Problem& problem, const SolverConfig& config,
                           const Vector& w0);

struct AfgOptions {
  std::size_t max_iterations = 1000;
  double gradient_mapping_tolerance = 0.0;  // stop once ||w - P(w - grad)|| <= tol; 0 disables
  double initial_lipschitz = 0.0;           // 0 picks the power-iteration estimate
};

struct AfgResult {
  Vector solution;
  double objective = 0.0;
  double gradient_mapping_norm = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Tolerance-driven FISTA used for reference solutions.
AfgResult afg_minimize(const Problem& problem, const Vector& w0, const AfgOptions& options);

// ||w - P(w - grad f(w))||, unit step. Zero exactly at minimizers.
double gradient_mapping_norm(const Problem& problem, const Vector& w);

}  // namespace vrsg
