#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <thread>

#include "CLI11.hpp"
#include "vrsg/harness.hpp"

namespace vrsg::harness {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << content;
}

json versions() {
  return json{{"vrsg", kVersion},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                            "." + std::to_string(EIGEN_MINOR_VERSION)},
              {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
              {"compiler", __VERSION__}};
}

json reference_json(const OptimalFacts& facts, const json& reference) {
  return json{{"f_star", facts.f_star},
              {"tolerance_requested", reference.at("tolerance")},
              {"tolerance_achieved", facts.tolerance_achieved},
              {"certified", facts.certified},
              {"shares_invariants", facts.shares_invariants()}};
}

json dataset_json(const LoadedDataset& ds) {
  json j = {{"name", ds.name},
            {"n", ds.data.matrix.n_rows()},
            {"d", ds.data.matrix.n_cols()},
            {"nnz", ds.data.matrix.nnz()}};
  if (ds.planted_rank) j["numerical_rank"] = *ds.planted_rank;
  return j;
}

json final_row_json(const RunTrace& trace) {
  if (trace.rows.empty()) return nullptr;
  const auto& r = trace.rows.back();
  json j = {{"epoch", r.epoch},
            {"grad_evals", r.grad_evals},
            {"probe_evals", r.probe_evals},
            {"objective", r.objective}};
  j["gap"] = r.gap ? json(*r.gap) : json(nullptr);
  return j;
}

std::optional<double> budget_of(const json& config) {
  if (config.at("budget_passes").is_null()) return std::nullopt;
  return config["budget_passes"].get<double>();
}

std::string sanitize(std::string s) {
  for (auto& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '-' && c != '_') c = '_';
  }
  return s;
}

std::string sweep_label(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

struct CellResult {
  std::string status = "pending";  // ok | diverged | error
  std::string message;
  std::optional<std::size_t> diverged_epoch;
  RunTrace trace;
  std::vector<std::string> warnings;
  json resolved_solver;
};

}  // namespace

int cmd_solve(json config, const fs::path& out_dir, std::ostream& log) {
  config = resolve_config(config);
  const auto algorithm = parse_algorithm(config["algorithm"].get<std::string>());
  const auto seed = config["seed"].get<std::uint64_t>();
  const fs::path base = config.value("base_dir", std::string("."));
  const auto ds = load_dataset(config["dataset"], config["problem"], base);
  const Problem problem = build_problem(config["problem"], ds.data);
  const auto facts = compute_reference(problem, config["reference"]);
  auto prepared = prepare_run(algorithm, problem, config["solver"], seed, budget_of(config));
  prepared.config.reference_objective = facts.f_star;
  if (!facts.certified) {
    prepared.warnings.push_back("reference tolerance not met (achieved " +
                                format_double(facts.tolerance_achieved) + "); gap column is flagged");
  }

  json manifest = {{"command", "solve"},
                   {"versions", versions()},
                   {"config", config},
                   {"seed", seed},
                   {"algorithm", algorithm_name(algorithm)},
                   {"dataset", dataset_json(ds)},
                   {"resolved_solver", prepared.resolved},
                   {"reference", reference_json(facts, config["reference"])},
                   {"gap_flagged", !facts.certified}};
  int code = kOk;
  RunTrace trace;
  try {
    trace = run_algorithm(algorithm, problem, prepared.config, Vector::Zero(ix(problem.d())));
    manifest["status"] = "completed";
    manifest["final"] = final_row_json(trace);
  } catch (const DivergenceError& e) {
    manifest["status"] = "diverged";
    manifest["diverged_epoch"] = e.epoch();
    manifest["error"] = e.what();
    log << "diverged at epoch " << e.epoch() << ": " << e.what() << "\n";
    code = kDiverged;
  } catch (const StagnationError& e) {
    manifest["status"] = "stagnated";
    manifest["error"] = e.what();
    log << "line search stagnated: " << e.what() << "\n";
    code = kDiverged;
  }
  manifest["warnings"] = prepared.warnings;
  for (const auto& w : prepared.warnings) log << "warning: " << w << "\n";
  write_file(out_dir / "trace.csv", trace_csv(trace));
  write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  if (code == kOk) {
    log << algorithm_name(algorithm) << ": " << trace.rows.size() << " rows, final objective "
        << format_double(trace.rows.back().objective) << ", wrote " << (out_dir / "trace.csv").string()
        << "\n";
  }
  return code;
}

int cmd_bench(json config, const fs::path& out_dir, std::ostream& log) {
  const bool has_algorithms = config.contains("algorithms");
  config = resolve_config(config);
  std::vector<Algorithm> algorithms;
  if (has_algorithms) {
    for (const auto& a : config["algorithms"]) algorithms.push_back(parse_algorithm(a.get<std::string>()));
  } else {
    algorithms.push_back(parse_algorithm(config["algorithm"].get<std::string>()));
  }
  if (algorithms.empty()) throw InvalidArgument("config: bench needs at least one algorithm");

  json datasets = config.contains("datasets") ? config["datasets"] : json::array({config["dataset"]});
  if (datasets.empty()) throw InvalidArgument("config: bench needs at least one dataset");
  json seeds = config.contains("seeds") ? config["seeds"] : json::array({config["seed"]});
  if (seeds.empty()) throw InvalidArgument("config: bench needs at least one seed");
  std::string sweep_param;
  json sweep_values = json::array({nullptr});
  if (config.contains("sweep")) {
    sweep_param = config["sweep"]["parameter"].get<std::string>();
    sweep_values = config["sweep"]["values"];
  }
  const fs::path base = config.value("base_dir", std::string("."));

  struct DatasetState {
    LoadedDataset ds;
    std::optional<Problem> problem;
    OptimalFacts facts;
  };
  std::vector<DatasetState> states;
  std::set<std::string> names;
  for (const auto& d : datasets) {
    DatasetState st;
    st.ds = load_dataset(d, config["problem"], base);
    if (!names.insert(st.ds.name).second) throw InvalidArgument("config: duplicate dataset name " + st.ds.name);
    st.problem.emplace(build_problem(config["problem"], st.ds.data));
    st.facts = compute_reference(*st.problem, config["reference"]);
    log << "reference for " << st.ds.name << ": f* = " << format_double(st.facts.f_star)
        << (st.facts.certified ? "" : " (tolerance not met)") << "\n";
    states.push_back(std::move(st));
  }

  struct Cell {
    std::size_t dataset;
    Algorithm algorithm;
    std::size_t sweep;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (std::size_t di = 0; di < states.size(); ++di) {
    for (const auto a : algorithms) {
      for (std::size_t si = 0; si < sweep_values.size(); ++si) {
        for (const auto& s : seeds) cells.push_back({di, a, si, s.get<std::uint64_t>()});
      }
    }
  }

  // Resolve every cell up front so config errors surface before any work.
  std::vector<PreparedRun> prepared;
  for (const auto& c : cells) {
    json solver = config["solver"];
    if (!sweep_param.empty()) solver[sweep_param] = sweep_values[c.sweep];
    if (sweep_param == "m_over_n") solver["inner_iterations"] = nullptr;
    if (sweep_param == "eta_times_LP") solver["step_size"] = nullptr;
    solver = resolve_config(json{{"solver", solver}})["solver"];
    auto p = prepare_run(c.algorithm, *states[c.dataset].problem, solver, c.seed, budget_of(config));
    p.config.reference_objective = states[c.dataset].facts.f_star;
    prepared.push_back(std::move(p));
  }

  std::vector<CellResult> results(cells.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t k = next++; k < cells.size(); k = next++) {
      const auto& c = cells[k];
      auto& r = results[k];
      const Problem& problem = *states[c.dataset].problem;
      try {
        r.trace = run_algorithm(c.algorithm, problem, prepared[k].config, Vector::Zero(ix(problem.d())));
        r.status = "ok";
      } catch (const DivergenceError& e) {
        r.status = "diverged";
        r.diverged_epoch = e.epoch();
        r.message = e.what();
      } catch (const std::exception& e) {
        r.status = "error";
        r.message = e.what();
      }
    }
  };
  std::size_t workers = config["workers"].get<std::size_t>();
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, cells.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  json cell_manifest = json::array();
  std::string aggregate = "dataset,algorithm,sweep_parameter,sweep_value,passes,mean_gap,runs,diverged\n";
  std::size_t diverged = 0;
  // Group index: cells of one group are contiguous (seeds innermost).
  for (std::size_t start = 0; start < cells.size(); start += seeds.size()) {
    const auto& c0 = cells[start];
    const std::size_t n = states[c0.dataset].ds.data.matrix.n_rows();
    const std::string dname = states[c0.dataset].ds.name;
    const std::string sval = sweep_param.empty() ? "" : sweep_label(sweep_values[c0.sweep]);
    std::uint64_t max_evals = 0;
    std::size_t group_diverged = 0;
    for (std::size_t k = start; k < start + seeds.size(); ++k) {
      const auto& c = cells[k];
      const auto& r = results[k];
      std::string file = sanitize(dname) + "__" + algorithm_name(c.algorithm);
      if (!sweep_param.empty()) file += "__" + sanitize(sweep_param + "-" + sval);
      file += "__seed" + std::to_string(c.seed) + ".csv";
      if (r.status == "ok") {
        write_file(out_dir / "cells" / file, trace_csv(r.trace));
        max_evals = std::max(max_evals, r.trace.rows.back().grad_evals);
      } else {
        ++group_diverged;
        log << "cell " << file << ": " << r.status << ": " << r.message << "\n";
      }
      json cj = {{"file", r.status == "ok" ? json("cells/" + file) : json(nullptr)},
                 {"dataset", dname},
                 {"algorithm", algorithm_name(c.algorithm)},
                 {"seed", c.seed},
                 {"status", r.status},
                 {"resolved_solver", prepared[k].resolved},
                 {"warnings", prepared[k].warnings}};
      if (!sweep_param.empty()) cj["sweep_value"] = sweep_values[c.sweep];
      if (r.diverged_epoch) cj["diverged_epoch"] = *r.diverged_epoch;
      if (!r.message.empty()) cj["error"] = r.message;
      if (r.status == "ok") cj["final"] = final_row_json(r.trace);
      cell_manifest.push_back(cj);
    }
    diverged += group_diverged;
    auto max_passes = static_cast<std::uint64_t>(
        std::ceil(static_cast<double>(max_evals) / static_cast<double>(n)));
    // Budgeted runs stop short of B passes when n + 2m does not divide it; the
    // table still reports every group at B.
    if (const auto budget = budget_of(config)) {
      max_passes = std::max(max_passes, static_cast<std::uint64_t>(std::floor(*budget)));
    }
    for (std::uint64_t b = 0; b <= max_passes; ++b) {
      double sum = 0.0;
      std::size_t runs = 0;
      for (std::size_t k = start; k < start + seeds.size(); ++k) {
        if (results[k].status != "ok") continue;
        const TraceRow* last = nullptr;
        for (const auto& row : results[k].trace.rows) {
          if (row.grad_evals <= b * n) last = &row;
        }
        if (last && last->gap) {
          sum += *last->gap;
          ++runs;
        }
      }
      aggregate += dname + "," + algorithm_name(c0.algorithm) + "," + sweep_param + "," + sval + "," +
                   std::to_string(b) + "," + (runs ? format_double(sum / static_cast<double>(runs)) : "") +
                   "," + std::to_string(runs) + "," + std::to_string(group_diverged) + "\n";
    }
  }
  write_file(out_dir / "aggregate.csv", aggregate);

  json refs = json::object();
  json ds_json = json::array();
  for (const auto& st : states) {
    refs[st.ds.name] = reference_json(st.facts, config["reference"]);
    ds_json.push_back(dataset_json(st.ds));
  }
  json manifest = {{"command", "bench"},
                   {"versions", versions()},
                   {"config", config},
                   {"datasets", ds_json},
                   {"references", refs},
                   {"cells", cell_manifest},
                   {"diverged_cells", diverged}};
  write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  log << "bench: " << cells.size() << " cells (" << diverged << " not completed), wrote "
      << (out_dir / "aggregate.csv").string() << "\n";
  return kOk;
}

int cmd_certify(json config, const fs::path& out_dir, std::ostream& log) {
  config = resolve_config(config);
  const fs::path base = config.value("base_dir", std::string("."));
  const auto ds = load_dataset(config["dataset"], config["problem"], base);
  const Problem problem = build_problem(config["problem"], ds.data);
  const auto& c = config["certify"];
  CertificateOptions opts;
  opts.sampling = c.at("sampling") == "uniform" ? SamplingMode::Uniform : SamplingMode::LipschitzProportional;
  opts.max_inner_iterations = c.at("max_inner_iterations").get<double>();
  opts.reference_tolerance = config["reference"]["tolerance"].get<double>();
  if (!c.at("theta").is_null()) opts.theta = c["theta"].get<double>();
  if (!c.at("mu").is_null()) opts.mu = c["mu"].get<double>();
  if (!c.at("m_bound").is_null()) opts.m_bound = c["m_bound"].get<double>();
  opts.initial_point = Vector::Zero(ix(problem.d()));

  const auto report = certify(problem, opts);
  json out = certificate_to_json(report);
  out["dataset"] = dataset_json(ds);

  const auto probes = c.at("ssc_probes").get<std::size_t>();
  if (probes > 0 && report.facts.certified && problem.d() <= 50) {
    const auto ssc = ssc_probe(problem, report.facts, probes, config["seed"].get<std::uint64_t>());
    out["ssc_probe"] = {{"beta_empirical", ssc.beta_empirical},
                        {"evaluated", ssc.evaluated},
                        {"excluded", ssc.excluded},
                        {"skipped", ssc.skipped},
                        {"passed", ssc.passed}};
  } else {
    out["ssc_probe"] = nullptr;
  }
  out["config"] = config;
  out["versions"] = versions();
  write_file(out_dir / "certificate.json", out.dump(2) + "\n");
  log << "certificate: rho = " << format_double(report.rho.value) << " at eta = " << format_double(report.eta)
      << ", m = " << format_double(report.m) << (report.linear_rate_found ? "" : " (no rho < 1 in the grid)")
      << "\n";
  return report.linear_rate_found ? kOk : kNoLinearRate;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Variance-reduced projected stochastic gradient: solve, bench, certify"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  const std::pair<const char*, const char*> commands[] = {
      {"solve", "run one algorithm on one dataset; writes trace.csv and manifest.json"},
      {"bench", "run algorithms x datasets x sweep x seeds; writes cells/, aggregate.csv, manifest.json"},
      {"certify", "compute theta, mu, M, beta and search (eta, m) for rho < 1; writes certificate.json"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--set", overrides, "dotted key=value override (repeatable)");
    sub->add_option("--seed", seed, "seed override");
    sub->add_option("--out", out_dir, "output directory");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    json config = load_config(config_path);
    for (const auto& o : overrides) apply_override(config, o);
    if (seed) {
      config["seed"] = *seed;
      if (config.contains("seeds")) config["seeds"] = json::array({*seed});
    }
    if (command == "solve") return cmd_solve(std::move(config), out_dir, out);
    if (command == "bench") return cmd_bench(std::move(config), out_dir, out);
    return cmd_certify(std::move(config), out_dir, out);
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kDiverged;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const BudgetError& e) {
    err << "budget error: " << e.what() << "\n";
    return kConfigError;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }
}

}  // namespace vrsg::harness
