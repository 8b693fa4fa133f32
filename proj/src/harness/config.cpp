#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "vrsg/geometry.hpp"
#include "vrsg/harness.hpp"

namespace vrsg::harness {

namespace fs = std::filesystem;

namespace {

constexpr Algorithm kAllAlgorithms[] = {Algorithm::Vrpsg, Algorithm::ProxSvrg, Algorithm::Sgd,
                                        Algorithm::Afg, Algorithm::Vrpsg2};

[[noreturn]] void config_error(const std::string& msg) { throw InvalidArgument("config: " + msg); }

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) config_error(where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!ok.count(key)) {
      std::string list;
      for (const auto& k : ok) list += (list.empty() ? "" : ", ") + k;
      config_error("unknown key '" + key + "' in " + where + " (expected one of: " + list + ")");
    }
  }
}

// Defaults below user values, recursively for objects.
json merged(const json& defaults, const json& user) {
  if (!user.is_object() || !defaults.is_object()) return user;
  json out = defaults;
  for (const auto& [key, value] : user.items()) {
    out[key] = out.contains(key) ? merged(out[key], value) : value;
  }
  return out;
}

double number(const json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number()) config_error(where + "." + key + " must be a number");
  return v.get<double>();
}

std::size_t count(const json& obj, const char* key, const std::string& where, std::size_t min = 1) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer() && !(v.is_number() && std::floor(v.get<double>()) == v.get<double>())) {
    config_error(where + "." + key + " must be an integer");
  }
  const double d = v.get<double>();
  if (d < static_cast<double>(min)) {
    config_error(where + "." + key + " must be >= " + std::to_string(min));
  }
  return static_cast<std::size_t>(d);
}

LossKind parse_loss(const json& problem) {
  const auto name = problem.at("loss").get<std::string>();
  if (name == "least_squares") return LossKind::LeastSquares;
  if (name == "logistic") return LossKind::Logistic;
  config_error("unknown loss '" + name + "' (valid: least_squares, logistic)");
}

json resolve_problem(const json& user) {
  json p = user.is_null() ? json::object() : user;
  check_keys(p, "problem", {"loss", "constraint", "regularizer", "linear_term"});
  if (!p.contains("loss")) p["loss"] = "least_squares";
  parse_loss(p);
  if (p.contains("constraint") && p.contains("regularizer")) {
    config_error("problem has both a constraint and a regularizer");
  }
  if (!p.contains("constraint") && !p.contains("regularizer")) {
    p["constraint"] = json{{"type", "l1_ball"}, {"tau", 10.0}};
  }
  if (p.contains("constraint")) {
    auto& c = p["constraint"];
    const auto type = c.value("type", std::string("l1_ball"));
    c["type"] = type;
    if (type == "l1_ball") {
      check_keys(c, "problem.constraint", {"type", "tau"});
      if (!c.contains("tau")) c["tau"] = 10.0;
    } else if (type == "box") {
      check_keys(c, "problem.constraint", {"type", "lower", "upper"});
      if (!c.contains("lower") || !c.contains("upper")) config_error("box needs lower and upper");
    } else {
      config_error("unknown constraint type '" + type + "' (valid: l1_ball, box)");
    }
  } else {
    auto& r = p["regularizer"];
    const auto type = r.value("type", std::string("l1"));
    if (type != "l1") config_error("unknown regularizer type '" + type + "' (valid: l1)");
    r["type"] = type;
    check_keys(r, "problem.regularizer", {"type", "lambda"});
    if (!r.contains("lambda")) r["lambda"] = 1e-3;
  }
  return p;
}

json resolve_dataset(const json& user, LossKind loss) {
  json d = user.is_null() ? json::object() : user;
  const auto kind = d.value("kind", std::string("synthetic"));
  const std::string task = loss == LossKind::Logistic ? "logistic" : "least_squares";
  if (kind == "synthetic") {
    check_keys(d, "dataset", {"kind", "name", "n", "d", "rank", "noise_std", "task",
                              "row_scale_spread", "seed"});
    const json defaults = {{"kind", "synthetic"}, {"name", "synthetic"}, {"n", 200},
                           {"d", 50}, {"rank", 20}, {"noise_std", 0.3},
                           {"task", task}, {"row_scale_spread", 1.0}, {"seed", 2024}};
    d = merged(defaults, d);
    if (d["task"] != task) config_error("dataset.task does not match problem.loss");
  } else if (kind == "libsvm") {
    check_keys(d, "dataset", {"kind", "name", "path", "remap_zero_one", "n_features"});
    if (!d.contains("path")) config_error("libsvm dataset needs a path");
    const json defaults = {{"kind", "libsvm"},
                           {"name", fs::path(d["path"].get<std::string>()).stem().string()},
                           {"remap_zero_one", false}};
    d = merged(defaults, d);
  } else {
    config_error("unknown dataset kind '" + kind + "' (valid: synthetic, libsvm)");
  }
  return d;
}

json resolve_solver(const json& user) {
  json s = user.is_null() ? json::object() : user;
  check_keys(s, "solver", {"epochs", "inner_iterations", "m_over_n", "eta_times_LP", "step_size",
                           "sgd_eta0", "sampling", "epoch_output", "strict_feasibility"});
  const json defaults = {{"epochs", 20},
                         {"inner_iterations", nullptr},
                         {"m_over_n", 1.0},
                         {"eta_times_LP", 0.1},
                         {"step_size", nullptr},
                         {"sgd_eta0", 1.0},
                         {"sampling", "proportional"},
                         {"epoch_output", "average"},
                         {"strict_feasibility", false}};
  s = merged(defaults, s);
  const auto sampling = s["sampling"].get<std::string>();
  if (sampling != "uniform" && sampling != "proportional") {
    config_error("unknown sampling '" + sampling + "' (valid: uniform, proportional)");
  }
  const auto output = s["epoch_output"].get<std::string>();
  if (output != "average" && output != "last") {
    config_error("unknown epoch_output '" + output + "' (valid: average, last)");
  }
  return s;
}

Vector broadcast(const json& v, std::size_t d, const char* what) {
  Vector out(ix(d));
  if (v.is_number()) {
    out.setConstant(v.get<double>());
  } else if (v.is_array()) {
    if (v.size() != d) config_error(std::string("box ") + what + " has the wrong length");
    for (std::size_t j = 0; j < d; ++j) out[ix(j)] = v[j].get<double>();
  } else {
    config_error(std::string("box ") + what + " must be a number or an array");
  }
  return out;
}

}  // namespace

const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::Vrpsg: return "vrpsg";
    case Algorithm::ProxSvrg: return "prox_svrg";
    case Algorithm::Sgd: return "sgd";
    case Algorithm::Afg: return "afg";
    case Algorithm::Vrpsg2: return "vrpsg2";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  std::string valid;
  for (const auto a : kAllAlgorithms) {
    if (name == algorithm_name(a)) return a;
    valid += (valid.empty() ? "" : ", ") + std::string(algorithm_name(a));
  }
  config_error("unknown algorithm '" + name + "' (valid: " + valid + ")");
}

json load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open " + path.string());
  json config;
  try {
    config = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    config_error(path.string() + ": " + e.what());
  }
  if (!config.is_object()) config_error("top level must be an object");
  if (!config.contains("base_dir")) {
    config["base_dir"] = fs::absolute(path).parent_path().string();
  }
  return config;
}

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) config_error("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &config;
  std::stringstream ks(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ks, part, '.')) {
    if (part.empty()) config_error("override key '" + key + "' has an empty segment");
    parts.push_back(part);
  }
  for (std::size_t k = 0; k + 1 < parts.size(); ++k) {
    json& next = (*node)[parts[k]];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) config_error("override key '" + key + "' crosses a non-object");
    node = &next;
  }
  (*node)[parts.back()] = value;
}

json resolve_config(const json& config) {
  if (!config.is_object()) config_error("top level must be an object");
  check_keys(config, "config", {"algorithm", "algorithms", "seed", "seeds", "dataset", "datasets",
                                "problem", "solver", "reference", "budget_passes", "sweep",
                                "workers", "certify", "base_dir", "description"});
  json out = config;
  if (!out.contains("algorithm")) out["algorithm"] = "vrpsg";
  parse_algorithm(out["algorithm"].get<std::string>());
  if (out.contains("algorithms")) {
    if (!out["algorithms"].is_array()) config_error("algorithms must be an array");
    for (const auto& a : out["algorithms"]) parse_algorithm(a.get<std::string>());
  }
  if (!out.contains("seed")) out["seed"] = 1;
  if (!out["seed"].is_number_integer()) config_error("seed must be an integer");
  if (out.contains("seeds")) {
    if (!out["seeds"].is_array()) config_error("seeds must be an array");
    for (const auto& s : out["seeds"]) {
      if (!s.is_number_integer()) config_error("seeds must be integers");
    }
  }
  out["problem"] = resolve_problem(out.value("problem", json::object()));
  const LossKind loss = parse_loss(out["problem"]);
  out["dataset"] = resolve_dataset(out.value("dataset", json::object()), loss);
  if (out.contains("datasets")) {
    if (!out["datasets"].is_array()) config_error("datasets must be an array");
    for (auto& d : out["datasets"]) d = resolve_dataset(d, loss);
  }
  out["solver"] = resolve_solver(out.value("solver", json::object()));

  json ref = out.value("reference", json::object());
  check_keys(ref, "reference", {"tolerance", "max_iterations"});
  out["reference"] = merged(json{{"tolerance", 1e-12}, {"max_iterations", 1000000}}, ref);

  if (!out.contains("budget_passes")) out["budget_passes"] = nullptr;
  if (!out["budget_passes"].is_null()) {
    if (!out["budget_passes"].is_number() || out["budget_passes"].get<double>() <= 0.0) {
      config_error("budget_passes must be a positive number");
    }
  }
  if (out.contains("sweep")) {
    auto& sw = out["sweep"];
    check_keys(sw, "sweep", {"parameter", "values"});
    const auto param = sw.at("parameter").get<std::string>();
    if (param != "sampling" && param != "m_over_n" && param != "eta_times_LP" && param != "sgd_eta0") {
      config_error("unknown sweep parameter '" + param +
                   "' (valid: sampling, m_over_n, eta_times_LP, sgd_eta0)");
    }
    if (!sw.at("values").is_array() || sw["values"].empty()) config_error("sweep.values must be a non-empty array");
  }
  if (!out.contains("workers")) out["workers"] = 0;

  json cert = out.value("certify", json::object());
  check_keys(cert, "certify", {"sampling", "max_inner_iterations", "theta", "mu", "m_bound", "ssc_probes"});
  out["certify"] = merged(json{{"sampling", "proportional"},
                               {"max_inner_iterations", 1e7},
                               {"theta", nullptr},
                               {"mu", nullptr},
                               {"m_bound", nullptr},
                               {"ssc_probes", 20}},
                          cert);
  return out;
}

LoadedDataset load_dataset(const json& dataset, const json& problem, const fs::path& base_dir) {
  const LossKind loss = parse_loss(problem);
  LoadedDataset out;
  out.name = dataset.at("name").get<std::string>();
  const auto kind = dataset.at("kind").get<std::string>();
  if (kind == "synthetic") {
    SyntheticSpec spec;
    spec.n = count(dataset, "n", "dataset");
    spec.d = count(dataset, "d", "dataset");
    spec.rank = count(dataset, "rank", "dataset");
    spec.noise_std = number(dataset, "noise_std", "dataset");
    spec.row_scale_spread = number(dataset, "row_scale_spread", "dataset");
    spec.seed = dataset.at("seed").get<std::uint64_t>();
    spec.task = loss;
    auto syn = gen_synthetic(spec);
    out.data = std::move(syn.data);
    out.planted_rank = syn.ground_truth_rank;
  } else {
    LibsvmOptions opts;
    opts.remap_zero_one = dataset.at("remap_zero_one").get<bool>();
    opts.require_plus_minus_one = loss == LossKind::Logistic;
    if (dataset.contains("n_features")) opts.n_features = count(dataset, "n_features", "dataset");
    fs::path path = dataset.at("path").get<std::string>();
    if (path.is_relative()) path = base_dir / path;
    out.data = read_libsvm(path, opts);
  }
  return out;
}

Problem build_problem(const json& problem, const Dataset& data) {
  const LossKind loss = parse_loss(problem);
  const std::size_t d = data.matrix.n_cols();
  Vector q = Vector::Zero(ix(d));
  if (problem.contains("linear_term")) q = broadcast(problem["linear_term"], d, "linear_term");
  ProblemSide side;
  if (problem.contains("constraint")) {
    const auto& c = problem["constraint"];
    if (c.at("type") == "l1_ball") {
      side = ConstraintSpec{L1Ball{number(c, "tau", "problem.constraint")}};
    } else {
      side = ConstraintSpec{Box{broadcast(c.at("lower"), d, "lower"), broadcast(c.at("upper"), d, "upper")}};
    }
  } else {
    side = RegularizerSpec{number(problem["regularizer"], "lambda", "problem.regularizer")};
  }
  return Problem(data.matrix, LossSpec{loss, data.labels}, std::move(q), std::move(side));
}

PreparedRun prepare_run(Algorithm algorithm, const Problem& problem, const json& solver,
                        std::uint64_t seed, std::optional<double> budget_passes) {
  PreparedRun out;
  out.resolved = solver;
  auto& cfg = out.config;
  const std::size_t n = problem.n();
  cfg.seed = seed;
  cfg.sampling = solver.at("sampling") == "uniform" ? SamplingMode::Uniform
                                                    : SamplingMode::LipschitzProportional;
  cfg.epoch_output = solver.at("epoch_output") == "last" ? EpochOutput::LastIterate : EpochOutput::Average;
  cfg.strict_feasibility = solver.at("strict_feasibility").get<bool>();
  cfg.sgd_initial_step = number(solver, "sgd_eta0", "solver");

  if (!solver.at("inner_iterations").is_null()) {
    cfg.inner_iterations = count(solver, "inner_iterations", "solver");
  } else {
    const double ratio = number(solver, "m_over_n", "solver");
    if (!(ratio > 0.0)) config_error("solver.m_over_n must be positive");
    cfg.inner_iterations = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n))));
  }

  const auto info = lipschitz_info(problem);
  const bool uses_vr = algorithm == Algorithm::Vrpsg || algorithm == Algorithm::ProxSvrg ||
                       algorithm == Algorithm::Vrpsg2;
  double l_p = 0.0;
  if (uses_vr) {
    l_p = aggregate_lipschitz(info, build_distribution(cfg.sampling, info, seed));
  }
  if (!solver.at("step_size").is_null()) {
    cfg.step_size = number(solver, "step_size", "solver");
  } else if (uses_vr) {
    cfg.step_size = number(solver, "eta_times_LP", "solver") / l_p;
  }

  cfg.epochs = count(solver, "epochs", "solver");
  if (budget_passes) {
    const double budget = *budget_passes * static_cast<double>(n);
    const double per_epoch = static_cast<double>(n + 2 * cfg.inner_iterations);
    double epochs = 0.0;
    switch (algorithm) {
      case Algorithm::Vrpsg:
      case Algorithm::ProxSvrg: epochs = std::floor(budget / per_epoch); break;
      case Algorithm::Vrpsg2: epochs = std::floor((budget - static_cast<double>(n)) / per_epoch); break;
      case Algorithm::Sgd:
      case Algorithm::Afg: epochs = std::floor(*budget_passes); break;
    }
    if (epochs < 1.0) config_error("budget_passes is too small for one epoch of " + std::string(algorithm_name(algorithm)));
    cfg.epochs = static_cast<std::size_t>(epochs);
  }
  cfg.validate();

  out.resolved["epochs"] = cfg.epochs;
  out.resolved["inner_iterations"] = cfg.inner_iterations;
  out.resolved["step_size"] = cfg.step_size;
  if (uses_vr) {
    out.resolved["L_P"] = l_p;
    if (cfg.step_size >= 1.0 / (4.0 * l_p)) {
      out.warnings.push_back("step size " + format_double(cfg.step_size) +
                             " is at or above 1/(4 L_P) = " + format_double(1.0 / (4.0 * l_p)) +
                             "; the linear-rate guarantee does not apply");
    }
  }
  return out;
}

RunTrace run_algorithm(Algorithm algorithm, const Problem& problem, const SolverConfig& config,
                       const Vector& w0) {
  switch (algorithm) {
    case Algorithm::Vrpsg: return run_vrpsg(problem, config, w0);
    case Algorithm::ProxSvrg: return run_prox_svrg(problem, config, w0);
    case Algorithm::Sgd: return run_projected_sgd(problem, config, w0);
    case Algorithm::Afg: return run_afg(problem, config, w0);
    case Algorithm::Vrpsg2: return run_hybrid_vrpsg2(problem, config, w0);
  }
  throw InvalidArgument("unreachable algorithm");
}

OptimalFacts compute_reference(const Problem& problem, const json& reference) {
  return reference_solution(problem, number(reference, "tolerance", "reference"),
                            count(reference, "max_iterations", "reference"));
}

}  // namespace vrsg::harness
