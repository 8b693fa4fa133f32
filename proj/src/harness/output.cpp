#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>

#include "vrsg/harness.hpp"

namespace vrsg::harness {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string trace_csv(const RunTrace& trace) {
  std::string out = "epoch,grad_evals,objective,gap,wall_ms\n";
  char wall[32];
  for (const auto& row : trace.rows) {
    out += std::to_string(row.epoch);
    out += ',';
    out += std::to_string(row.grad_evals);
    out += ',';
    out += format_double(row.objective);
    out += ',';
    if (row.gap) out += format_double(*row.gap);
    out += ',';
    std::snprintf(wall, sizeof wall, "%.3f", row.wall_ms);
    out += wall;
    out += '\n';
  }
  return out;
}

namespace {

json constant(const Constant& c) { return json{{"value", c.value}, {"provenance", c.provenance}}; }

json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index j = 0; j < v.size(); ++j) a.push_back(v[j]);
  return a;
}

}  // namespace

json certificate_to_json(const CertificateReport& r) {
  json out;
  out["constants"] = {{"L", constant(r.l)},
                      {"L_avg", constant(r.l_avg)},
                      {"L_max", constant(r.l_max)},
                      {"L_P", constant(r.l_p)},
                      {"theta_bound", constant(r.theta_bound)},
                      {"mu", constant(r.mu)},
                      {"M", constant(r.m_bound)},
                      {"grad_h_norm", constant(r.grad_h_norm)},
                      {"beta", constant(r.beta)}};
  out["rate"] = {{"rho", r.rho.value},
                 {"eta", r.eta},
                 {"m", r.m},
                 {"linear_rate_found", r.linear_rate_found}};
  out["mu_is_estimate"] = r.mu_is_estimate;
  out["notes"] = r.notes;
  const auto& f = r.facts;
  json facts = {{"f_star", f.f_star},
                {"r_star", vector_json(f.r_star)},
                {"s_star", f.s_star},
                {"regularizer_star", f.regularizer_star},
                {"tolerance_achieved", f.tolerance_achieved},
                {"certified", f.certified},
                {"r_spread", f.r_spread},
                {"s_spread", f.s_spread}};
  facts["solution"] = f.reference_solutions.empty() ? json::array() : vector_json(f.best_solution());
  out["optimal_facts"] = facts;
  return out;
}

}  // namespace vrsg::harness
