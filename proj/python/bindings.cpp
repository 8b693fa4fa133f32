#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "vrsg/certificates.hpp"
#include "vrsg/data.hpp"
#include "vrsg/geometry.hpp"
#include "vrsg/harness.hpp"
#include "vrsg/solvers.hpp"

namespace py = pybind11;
using namespace vrsg;
using harness::json;

namespace {

LossKind loss_of(const std::string& task) {
  if (task == "least_squares") return LossKind::LeastSquares;
  if (task == "logistic") return LossKind::Logistic;
  throw InvalidArgument("unknown task '" + task + "' (valid: least_squares, logistic)");
}

py::dict trace_dict(const RunTrace& trace) {
  py::list rows;
  for (const auto& r : trace.rows) {
    py::dict row;
    row["epoch"] = r.epoch;
    row["grad_evals"] = r.grad_evals;
    row["probe_evals"] = r.probe_evals;
    row["objective"] = r.objective;
    row["gap"] = r.gap ? py::object(py::float_(*r.gap)) : py::object(py::none());
    row["wall_ms"] = r.wall_ms;
    rows.append(row);
  }
  py::dict out;
  out["rows"] = rows;
  out["final_iterate"] = trace.final_iterate;
  out["L_P"] = trace.l_p;
  return out;
}

// One run described by a config document, without touching the filesystem
// beyond reading a libsvm dataset.
py::dict run_config(const std::string& text) {
  const json config = harness::resolve_config(json::parse(text));
  const auto algorithm = harness::parse_algorithm(config["algorithm"].get<std::string>());
  const auto ds = harness::load_dataset(config["dataset"], config["problem"],
                                        config.value("base_dir", std::string(".")));
  const Problem problem = harness::build_problem(config["problem"], ds.data);
  const auto facts = harness::compute_reference(problem, config["reference"]);
  std::optional<double> budget;
  if (!config["budget_passes"].is_null()) budget = config["budget_passes"].get<double>();
  auto prepared = harness::prepare_run(algorithm, problem, config["solver"], config["seed"].get<std::uint64_t>(),
                                       budget);
  prepared.config.reference_objective = facts.f_star;
  RunTrace trace;
  {
    py::gil_scoped_release release;
    trace = harness::run_algorithm(algorithm, problem, prepared.config, Vector::Zero(ix(problem.d())));
  }
  py::dict out = trace_dict(trace);
  out["f_star"] = facts.f_star;
  out["reference_certified"] = facts.certified;
  out["resolved_solver"] = prepared.resolved.dump();
  out["warnings"] = prepared.warnings;
  return out;
}

std::string certify_config(const std::string& text) {
  const json config = harness::resolve_config(json::parse(text));
  const auto ds = harness::load_dataset(config["dataset"], config["problem"],
                                        config.value("base_dir", std::string(".")));
  const Problem problem = harness::build_problem(config["problem"], ds.data);
  CertificateOptions opts;
  const auto& c = config["certify"];
  opts.sampling = c.at("sampling") == "uniform" ? SamplingMode::Uniform : SamplingMode::LipschitzProportional;
  opts.max_inner_iterations = c.at("max_inner_iterations").get<double>();
  opts.reference_tolerance = config["reference"]["tolerance"].get<double>();
  if (!c.at("theta").is_null()) opts.theta = c["theta"].get<double>();
  if (!c.at("mu").is_null()) opts.mu = c["mu"].get<double>();
  if (!c.at("m_bound").is_null()) opts.m_bound = c["m_bound"].get<double>();
  opts.initial_point = Vector::Zero(ix(problem.d()));
  return harness::certificate_to_json(certify(problem, opts)).dump();
}

py::tuple cli(const std::vector<std::string>& args) {
  std::vector<std::string> argv_store = {"vrsg"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    code = harness::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_vrsg, m) {
  m.doc() = "Variance-reduced projected stochastic gradient core";
  m.attr("__version__") = harness::kVersion;

  static py::exception<BudgetError> budget_error(m, "BudgetError");
  static py::exception<DivergenceError> divergence_error(m, "DivergenceError");
  static py::exception<ParseError> parse_error(m, "ParseError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const BudgetError& e) {
      py::set_error(budget_error, e.what());
    } catch (const DivergenceError& e) {
      py::set_error(divergence_error, e.what());
    } catch (const ParseError& e) {
      py::set_error(parse_error, e.what());
    } catch (const InvalidArgument& e) {
      py::set_error(PyExc_ValueError, e.what());
    } catch (const json::exception& e) {
      py::set_error(PyExc_ValueError, e.what());
    }
  });

  m.def("project_l1_ball", &project_l1_ball, py::arg("v"), py::arg("tau"));
  m.def("project_box", &project_box, py::arg("v"), py::arg("lower"), py::arg("upper"));
  m.def("prox_l1", &prox_l1, py::arg("v"), py::arg("t"));

  m.def("theoretical_rate",
        [](double eta, double mm, double l_p, double beta) {
          const auto r = theoretical_rate(eta, mm, l_p, beta);
          return py::make_tuple(r.rho, r.linear);
        },
        py::arg("eta"), py::arg("m"), py::arg("L_P"), py::arg("beta"));
  m.def("beta_from_constants", &beta_from_constants, py::arg("theta"), py::arg("mu"), py::arg("M"),
        py::arg("grad_h_norm"));
  m.def("hoffman_theta_bound", &hoffman_theta_bound, py::arg("C"), py::arg("b"), py::arg("X"));

  m.def("gen_synthetic",
        [](std::size_t n, std::size_t d, std::size_t rank, double noise_std, const std::string& task,
           double spread, std::uint64_t seed) {
          const auto syn = gen_synthetic(SyntheticSpec{n, d, rank, noise_std, loss_of(task), spread, seed});
          py::dict out;
          out["X"] = syn.data.matrix.to_dense();
          out["y"] = syn.data.labels;
          out["rank"] = syn.ground_truth_rank;
          out["planted"] = syn.planted;
          return out;
        },
        py::arg("n"), py::arg("d"), py::arg("rank"), py::arg("noise_std") = 0.0,
        py::arg("task") = "least_squares", py::arg("row_scale_spread") = 1.0, py::arg("seed") = 1);
  m.def("numerical_rank", [](const Matrix& x) { return numerical_rank(SparseDesignMatrix::from_dense(x)); });
  m.def("read_libsvm",
        [](const std::string& path, bool remap_zero_one, bool require_plus_minus_one) {
          const auto ds = read_libsvm(path, LibsvmOptions{remap_zero_one, require_plus_minus_one, std::nullopt});
          return py::make_tuple(ds.matrix.to_dense(), ds.labels);
        },
        py::arg("path"), py::arg("remap_zero_one") = false, py::arg("require_plus_minus_one") = false);

  m.def("run_config", &run_config, py::arg("config_json"));
  m.def("certify_config", &certify_config, py::arg("config_json"));
  m.def("cli", &cli, py::arg("args"));
}
