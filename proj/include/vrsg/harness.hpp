#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vrsg/certificates.hpp"
#include "vrsg/data.hpp"
#include "vrsg/errors.hpp"
#include "vrsg/solvers.hpp"

namespace vrsg::harness {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";

enum class Algorithm { Vrpsg, ProxSvrg, Sgd, Afg, Vrpsg2 };

const char* algorithm_name(Algorithm a);
// Throws InvalidArgument naming the valid choices.
Algorithm parse_algorithm(const std::string& name);

enum ExitCode : int { kOk = 0, kConfigError = 1, kDiverged = 2, kNoLinearRate = 3 };

/// Reads a JSON config. Relative dataset paths resolve against the config's
/// directory, recorded under "base_dir".
json load_config(const std::filesystem::path& path);

/// `key=value` with a dotted key path. The value is parsed as JSON when it
/// parses, otherwise it is taken as a string.
void apply_override(json& config, const std::string& assignment);

/// Fills every default so the result fully describes a run.
json resolve_config(const json& config);

struct LoadedDataset {
  std::string name;
  Dataset data;
  std::optional<std::size_t> planted_rank;
};
LoadedDataset load_dataset(const json& dataset, const json& problem,
                           const std::filesystem::path& base_dir);

Problem build_problem(const json& problem, const Dataset& data);

struct PreparedRun {
  SolverConfig config;
  json resolved;  // the solver block with eta and m made explicit
  std::vector<std::string> warnings;
};

/// Turns relative settings (eta_times_LP, m_over_n, budget_passes) into an
/// absolute SolverConfig for one algorithm on one problem.
PreparedRun prepare_run(Algorithm algorithm, const Problem& problem, const json& solver,
                        std::uint64_t seed, std::optional<double> budget_passes);

RunTrace run_algorithm(Algorithm algorithm, const Problem& problem, const SolverConfig& config,
                       const Vector& w0);

OptimalFacts compute_reference(const Problem& problem, const json& reference);

// Shortest round-trip decimal form.
std::string format_double(double v);

// epoch,grad_evals,objective,gap,wall_ms
std::string trace_csv(const RunTrace& trace);

json certificate_to_json(const CertificateReport& report);

int cmd_solve(json config, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_bench(json config, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_certify(json config, const std::filesystem::path& out_dir, std::ostream& log);

/// Full command-line entry point: `solve|bench|certify --config FILE
/// [--set k=v]... [--seed N] [--out DIR]`.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace vrsg::harness
