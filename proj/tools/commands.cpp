#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "cli.hpp"
#include "specdet/acceptance.hpp"
#include "specdet/airy.hpp"
#include "specdet/determinants.hpp"
#include "specdet/errors.hpp"
#include "specdet/ode_engine.hpp"
#include "specdet/spectrum.hpp"

namespace specdet::cli {

namespace {

using Json = nlohmann::ordered_json;

Json to_json(cplx v) { return Json::array({v.real(), v.imag()}); }

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

std::string num(cplx v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.15g%+.15gi", v.real(), v.imag());
  return buf;
}

void row(std::ostream& err, const std::string& label, const std::string& value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "  %-30s ", label.c_str());
  err << buf << value << "\n";
}

void emit(std::ostream& out, const Json& j) { out << j.dump(2) << "\n"; }

Json potential_json(const Potential& pot) {
  Json j;
  j["kind"] = to_string(pot.kind());
  j["c"] = pot.c();
  j["p"] = pot.p();
  j["x0"] = pot.x0();
  j["C0"] = pot.C0();
  j["eps0"] = pot.eps0();
  return j;
}

IntegratorOptions integrator(const RunConfig& cfg) { return {cfg.rel_tol, cfg.abs_tol}; }

ReportOptions report_options(const RunConfig& cfg) {
  ReportOptions o;
  o.eigenvalues = cfg.eigenvalues;
  o.green = cfg.green;
  o.det.integrator = integrator(cfg);
  o.eigen.polish = integrator(cfg);
  return o;
}

// ---------------------------------------------------------------------------

int run_validate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const Potential pot = make_potential(cfg.potential);
  const ValidityReport r = validate_hypothesis(pot, GridSpec{cfg.points, cfg.x_max_factor});
  const ConditionCheck* checks[] = {&r.lower_bound, &r.ratio_decay, &r.integrability};

  if (cfg.format == OutputFormat::Json) {
    Json j;
    j["potential"] = potential_json(pot);
    j["valid"] = r.valid;
    j["error"] = r.error;
    j["offending_x"] = r.offending_x ? Json(*r.offending_x) : Json(nullptr);
    j["conditions"] = Json::array();
    for (const ConditionCheck* c : checks) {
      j["conditions"].push_back(
          {{"name", c->name}, {"passed", c->passed}, {"value", c->value}, {"margin", c->margin}, {"detail", c->detail}});
    }
    j["tail_estimate"] = r.tail_estimate;
    j["all_passed"] = r.all_passed();
    emit(out, j);
  } else if (cfg.format == OutputFormat::Csv) {
    out << "condition,passed,value,margin\n";
    for (const ConditionCheck* c : checks)
      out << c->name << "," << (c->passed ? 1 : 0) << "," << num(c->value) << "," << num(c->margin) << "\n";
  }
  err << "validate " << to_string(pot.kind()) << "\n";
  if (!r.valid) err << "  evaluation failed: " << r.error << "\n";
  for (const ConditionCheck* c : checks)
    row(err, c->name, std::string(c->passed ? "pass  " : "FAIL  ") + num(c->value) + "  (" + c->detail + ")");
  return r.all_passed() ? kPass : kResidualFail;
}

// ---------------------------------------------------------------------------

int run_eig(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const Potential pot = make_potential(cfg.potential);
  EigenOptions eopts;
  eopts.polish = integrator(cfg);
  const Spectrum s = find_eigenvalues(pot, cfg.alpha, cfg.count, eopts);

  std::optional<TruncatedOracle> oracle;
  double max_dev = 0.0;
  if (cfg.oracle) {
    const double L = cfg.oracle_length ? *cfg.oracle_length : default_x_cap(pot, cplx(s.eigenvalues.back(), 0.0));
    oracle = truncated_oracle_eigenvalues(pot, cfg.alpha, L, cfg.count);
    if (oracle->ok) {
      for (std::size_t k = 0; k < s.eigenvalues.size(); ++k)
        max_dev = std::max(max_dev, std::abs(s.eigenvalues[k] - oracle->eigenvalues[k]));
    }
  }
  const double threshold = cfg.threshold.value_or(1e-8 * std::max(1.0, std::abs(s.eigenvalues.back())));
  const bool passed = !oracle || (oracle->ok && max_dev < threshold);

  if (cfg.format == OutputFormat::Json) {
    Json j;
    j["potential"] = potential_json(pot);
    j["alpha"] = cfg.alpha.alpha();
    j["eigenvalues"] = s.eigenvalues;
    j["residuals"] = s.residuals;
    j["multiplicity"] = s.multiplicity;
    const WeylTail& w = s.weyl_tail;
    j["weyl_tail"] = {{"valid", w.valid}, {"A", w.A}, {"gamma", w.gamma}, {"shift", w.shift},
                      {"max_rel_residual", w.max_rel_residual}, {"note", w.note}};
    if (oracle) {
      j["oracle_length"] = oracle->L;
      j["oracle_max_dev"] = oracle->ok ? Json(max_dev) : Json(nullptr);
      j["oracle_shift"] = oracle->max_shift;
      if (!oracle->ok) j["oracle_error"] = oracle->error;
    } else {
      j["oracle_max_dev"] = nullptr;
    }
    j["threshold"] = threshold;
    j["passed"] = passed;
    emit(out, j);
  } else if (cfg.format == OutputFormat::Csv) {
    out << "k,eigenvalue,residual" << (oracle && oracle->ok ? ",oracle" : "") << "\n";
    for (std::size_t k = 0; k < s.eigenvalues.size(); ++k) {
      out << k + 1 << "," << num(s.eigenvalues[k]) << "," << num(s.residuals[k]);
      if (oracle && oracle->ok) out << "," << num(oracle->eigenvalues[k]);
      out << "\n";
    }
  }
  err << "eigenvalues of " << to_string(pot.kind()) << ", alpha = " << num(cfg.alpha.alpha()) << "\n";
  for (std::size_t k = 0; k < s.eigenvalues.size(); ++k) {
    std::string line = num(s.eigenvalues[k]) + "  residual " + num(s.residuals[k]);
    if (oracle && oracle->ok) line += "  oracle " + num(oracle->eigenvalues[k]);
    row(err, "lambda_" + std::to_string(k + 1), line);
  }
  if (oracle) {
    if (oracle->ok)
      row(err, "oracle max deviation", num(max_dev) + (passed ? " < " : " >= ") + num(threshold));
    else
      row(err, "oracle", "failed: " + oracle->error);
  }
  return passed ? kPass : kResidualFail;
}

// ---------------------------------------------------------------------------

double residual_threshold(const RunConfig& cfg, const std::string& name) {
  if (cfg.threshold) return *cfg.threshold;
  if (name == "closed_vs_spectral_relative") return 1e-3;
  if (name == "closed_vs_green") return 1e-6;
  return 1e-4;  // comparisons against the spectral sum
}

Json report_json(const DetTraceReport& r, const Potential& pot, const RunConfig& cfg, bool passed) {
  Json j;
  j["quantity"] = r.quantity;
  j["potential"] = potential_json(pot);
  j["z"] = to_json(r.z);
  j["z0"] = to_json(r.z0);
  j["x0"] = r.x0;
  j["alpha"] = r.alpha.alpha();
  if (r.alpha2) j["alpha2"] = r.alpha2->alpha();
  j["closed_form"] = to_json(r.closed_form);
  if (r.log_closed_form) j["log_closed_form"] = to_json(*r.log_closed_form);
  j["spectral"] = r.spectral ? to_json(*r.spectral) : Json(nullptr);
  if (r.quantity == "trace") j["green_diag"] = r.green_diag ? to_json(*r.green_diag) : Json(nullptr);
  Json terms = Json::object();
  for (const NamedValue& t : r.terms) terms[t.name] = to_json(t.value);
  j["terms"] = terms;
  if (r.correction) j["correction_integral"] = to_json(*r.correction);
  Json residuals = Json::object();
  for (const NamedResidual& res : r.residuals) residuals[res.name] = res.value;
  j["residuals"] = residuals;
  Json thresholds = Json::object();
  for (const NamedResidual& res : r.residuals) thresholds[res.name] = residual_threshold(cfg, res.name);
  j["thresholds"] = thresholds;
  j["n_eigenvalues_used"] = r.n_eigenvalues_used;
  j["tail_correction"] = to_json(r.tail_correction);
  j["warnings"] = r.warnings;
  j["passed"] = passed;
  return j;
}

void report_table(const DetTraceReport& r, std::ostream& err) {
  err << r.quantity << " at z = " << num(r.z) << ", z0 = " << num(r.z0) << ", x0 = " << num(r.x0)
      << ", alpha = " << num(r.alpha.alpha());
  if (r.alpha2) err << ", alpha2 = " << num(r.alpha2->alpha());
  err << "\n";
  row(err, "closed form", num(r.closed_form));
  if (r.log_closed_form) row(err, "log closed form", num(*r.log_closed_form));
  for (const NamedValue& t : r.terms) row(err, t.name, num(t.value));
  if (r.green_diag) row(err, "green diagonal", num(*r.green_diag));
  if (r.spectral) {
    row(err, "spectral (" + std::to_string(r.n_eigenvalues_used) + " terms)", num(*r.spectral));
    row(err, "tail correction", num(r.tail_correction));
  }
  for (const NamedResidual& res : r.residuals) row(err, res.name, num(res.value));
  for (const std::string& w : r.warnings) err << "  warning: " << w << "\n";
}

void write_trajectory(const RunConfig& cfg, const Potential& pot) {
  if (cfg.trajectory.empty()) return;
  JostOptions jost;
  jost.record_trajectory = true;
  const JostResult res = jost_solution(pot, cfg.z, integrator(cfg), jost);
  std::ofstream file(cfg.trajectory);
  if (!file) throw UsageError("cannot write trajectory file '" + cfg.trajectory + "'");
  write_trajectory_csv(file, res.trajectory);
}

int run_report(const std::string& command, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const Potential pot = make_potential(cfg.potential);
  if (command == "det2" && cfg.alpha2) throw UsageError("det2 takes a single boundary condition");
  const ReportOptions opts = report_options(cfg);
  const double x0 = pot.x0();

  std::vector<cplx> zs = cfg.grid.empty() ? std::vector<cplx>{cfg.z} : cfg.grid;
  std::vector<DetTraceReport> reports;
  bool all_passed = true;
  std::vector<bool> passed;
  for (cplx z : zs) {
    DetTraceReport r = command == "det2" ? det2_report(pot, cfg.alpha, z, cfg.z0, x0, opts)
                       : cfg.alpha2      ? two_bc_trace_report(pot, cfg.alpha, *cfg.alpha2, z, cfg.z0, x0, opts)
                                         : trace_report(pot, cfg.alpha, z, cfg.z0, x0, opts);
    bool ok = true;
    for (const NamedResidual& res : r.residuals)
      if (!(res.value < residual_threshold(cfg, res.name))) ok = false;
    all_passed = all_passed && ok;
    passed.push_back(ok);
    reports.push_back(std::move(r));
  }
  write_trajectory(cfg, pot);

  if (cfg.format == OutputFormat::Json) {
    if (cfg.grid.empty()) {
      emit(out, report_json(reports.front(), pot, cfg, passed.front()));
    } else {
      Json j;
      j["reports"] = Json::array();
      for (std::size_t i = 0; i < reports.size(); ++i) j["reports"].push_back(report_json(reports[i], pot, cfg, passed[i]));
      j["passed"] = all_passed;
      emit(out, j);
    }
  } else if (cfg.format == OutputFormat::Csv) {
    out << "re_z,im_z,name,re,im\n";
    for (const DetTraceReport& r : reports) {
      const std::string prefix = num(r.z.real()) + "," + num(r.z.imag()) + ",";
      auto line = [&](const std::string& name, cplx v) {
        out << prefix << name << "," << num(v.real()) << "," << num(v.imag()) << "\n";
      };
      line("closed_form", r.closed_form);
      if (r.log_closed_form) line("log_closed_form", *r.log_closed_form);
      for (const NamedValue& t : r.terms) line(t.name, t.value);
      if (r.green_diag) line("green_diag", *r.green_diag);
      if (r.spectral) line("spectral", *r.spectral);
      for (const NamedResidual& res : r.residuals) line(res.name, res.value);
    }
  }
  for (const DetTraceReport& r : reports) report_table(r, err);
  return all_passed ? kPass : kResidualFail;
}

// ---------------------------------------------------------------------------

int run_airy_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.potential.kind != "linear" || cfg.alpha.alpha() != 0.0)
    throw UsageError("airy-verify uses q(x) = x with the Dirichlet condition");
  const Potential pot = make_potential(cfg.potential);
  const double x0 = pot.x0();
  const std::vector<cplx> grid =
      cfg.grid.empty() ? std::vector<cplx>{-2.0, -1.5, -1.0, -0.5, 0.5, 1.0} : cfg.grid;
  const FactorReport factor = exponential_factor_experiment(grid, cfg.z0);
  DetOptions dopts;
  dopts.integrator = integrator(cfg);

  struct Point {
    cplx trace_exact, trace_numeric, det2_exact, det2_numeric;
    double trace_dev, det2_dev;
  };
  std::vector<Point> points;
  double max_trace_dev = 0.0, max_det2_dev = 0.0;
  for (cplx z : grid) {
    const AiryClosedForms exact = airy_closed_forms(z, cfg.z0, x0, x0);
    Point p;
    p.trace_exact = exact.trace;
    p.trace_numeric = trace_closed(pot, cfg.alpha, z, cfg.z0, x0, dopts).value;
    p.det2_exact = exact.det2;
    p.det2_numeric = det2_closed(pot, cfg.alpha, z, cfg.z0, x0, dopts).value;
    p.trace_dev = std::abs(p.trace_numeric - p.trace_exact);
    p.det2_dev = std::abs(p.det2_numeric - p.det2_exact) / std::max(1e-300, std::abs(p.det2_exact));
    max_trace_dev = std::max(max_trace_dev, p.trace_dev);
    max_det2_dev = std::max(max_det2_dev, p.det2_dev);
    points.push_back(p);
  }
  const double tol = cfg.threshold.value_or(1e-8);
  const double offset_tol = cfg.threshold.value_or(1e-6);
  const bool passed = factor.max_residual_full < tol && factor.max_offset_deviation < offset_tol &&
                      factor.offset_spread < offset_tol && max_trace_dev < tol && max_det2_dev < tol;

  if (cfg.format == OutputFormat::Json) {
    Json j;
    j["z0"] = to_json(factor.z0);
    j["x0"] = x0;
    j["expected_offset"] = to_json(factor.expected_offset);
    j["points"] = Json::array();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const FactorPoint& m = factor.points[i];
      const Point& p = points[i];
      j["points"].push_back({{"z", to_json(m.z)},
                             {"trace_closed_form", to_json(p.trace_exact)},
                             {"trace_numeric", to_json(p.trace_numeric)},
                             {"trace_deviation", p.trace_dev},
                             {"det2_closed_form", to_json(p.det2_exact)},
                             {"det2_numeric", to_json(p.det2_numeric)},
                             {"det2_relative_deviation", p.det2_dev},
                             {"residual_full", to_json(m.residual_full)},
                             {"residual_truncated", to_json(m.residual_truncated)},
                             {"factor_modulus", m.factor_modulus}});
    }
    j["max_residual_full"] = factor.max_residual_full;
    j["max_offset_deviation"] = factor.max_offset_deviation;
    j["offset_spread"] = factor.offset_spread;
    j["max_trace_deviation"] = max_trace_dev;
    j["max_det2_relative_deviation"] = max_det2_dev;
    j["passed"] = passed;
    emit(out, j);
  } else if (cfg.format == OutputFormat::Csv) {
    out << "re_z,im_z,trace_deviation,det2_relative_deviation,re_residual_full,im_residual_full,"
           "re_residual_truncated,im_residual_truncated\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const FactorPoint& m = factor.points[i];
      out << num(m.z.real()) << "," << num(m.z.imag()) << "," << num(points[i].trace_dev) << ","
          << num(points[i].det2_dev) << "," << num(m.residual_full.real()) << "," << num(m.residual_full.imag())
          << "," << num(m.residual_truncated.real()) << "," << num(m.residual_truncated.imag()) << "\n";
    }
  }
  err << "airy-verify at z0 = " << num(cfg.z0) << ", x0 = " << num(x0) << "\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    row(err, "z = " + num(grid[i]),
        "trace dev " + num(points[i].trace_dev) + "  det2 dev " + num(points[i].det2_dev) + "  truncated residual " +
            num(factor.points[i].residual_truncated));
  }
  row(err, "expected offset", num(factor.expected_offset));
  row(err, "max full residual", num(factor.max_residual_full));
  row(err, "max offset deviation", num(factor.max_offset_deviation));
  row(err, "offset spread", num(factor.offset_spread));
  return passed ? kPass : kResidualFail;
}

// ---------------------------------------------------------------------------

int run_accept(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  for (int id : cfg.criteria)
    if (id > acceptance_count()) throw UsageError("no acceptance criterion " + std::to_string(id));
  const AcceptanceReport rep = run_acceptance(cfg.criteria);

  if (cfg.format == OutputFormat::Json) {
    // Wall times stay out of the payload so that reruns produce identical bytes.
    Json j;
    j["criteria"] = Json::array();
    for (const CriterionResult& c : rep.criteria) {
      j["criteria"].push_back({{"id", c.id},
                               {"name", c.name},
                               {"passed", c.passed},
                               {"measured", c.measured},
                               {"threshold", c.threshold},
                               {"time_limit", c.time_limit},
                               {"details", c.details},
                               {"error", c.error}});
    }
    j["all_passed"] = rep.all_passed();
    emit(out, j);
  } else if (cfg.format == OutputFormat::Csv) {
    out << "id,name,passed,measured,threshold\n";
    for (const CriterionResult& c : rep.criteria)
      out << c.id << ",\"" << c.name << "\"," << (c.passed ? 1 : 0) << "," << num(c.measured) << ","
          << num(c.threshold) << "\n";
  }
  for (const CriterionResult& c : rep.criteria) err << format_line(c) << "\n";
  err << (rep.all_passed() ? "all criteria passed" : "some criteria FAILED") << "\n";
  return rep.all_passed() ? kPass : kResidualFail;
}

}  // namespace

int run_command(const std::string& command, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (command == "validate") return run_validate(cfg, out, err);
  if (command == "eig") return run_eig(cfg, out, err);
  if (command == "trace" || command == "det2") return run_report(command, cfg, out, err);
  if (command == "airy-verify") return run_airy_verify(cfg, out, err);
  if (command == "accept") return run_accept(cfg, out, err);
  throw UsageError("unknown command '" + command + "'");
}

std::string error_json(const std::exception& e, int& exit_code) {
  Json j;
  Json inner;
  if (dynamic_cast<const UsageError*>(&e)) {
    exit_code = kUsage;
    inner["kind"] = "usage";
  } else if (const auto* n = dynamic_cast<const NumericalError*>(&e)) {
    exit_code = kNumerical;
    inner["kind"] = dynamic_cast<const PoleProximityError*>(&e) ? "pole_proximity"
                    : dynamic_cast<const BranchError*>(&e)      ? "branch"
                                                                : "numerical";
    inner["position"] = n->position();
  } else {
    exit_code = kNumerical;
    inner["kind"] = "internal";
  }
  inner["message"] = e.what();
  j["error"] = inner;
  return j.dump(2);
}

}  // namespace specdet::cli
