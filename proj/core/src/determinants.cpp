#include "specdet/determinants.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "specdet/errors.hpp"

namespace specdet {

namespace {

constexpr double kMaxLog = 700.0;

void require_trace_class(const Potential& pot) {
  if (!(pot.growth_exponent() > 2.0 / 3.0)) {
    throw UsageError("traces and det2 need q growing faster than x^(2/3)");
  }
}

/// z must stay off the cut [min_{x >= x0} q, inf) when real.
void require_off_cut(const Potential& pot, cplx z, double x0) {
  if (z.imag() != 0.0) return;
  double lowest = pot.q(x0);
  if (!pot.is_monomial()) {
    for (int i = 0; i <= 512; ++i) lowest = std::min(lowest, pot.q(x0 * std::pow(1e4, i / 512.0)));
  }
  if (!(lowest > z.real())) {
    throw BranchError("principal square root of q - z is ambiguous: z real and q(x) <= z beyond x0", z.real());
  }
}

/// Exponent m of the tail map x = B t^(-m) that leaves an integrand of size ~q^(-3/2) bounded at t = 0.
double tail_map_exponent(const Potential& pot) {
  const double p = pot.growth_exponent();
  return std::clamp(1.0 / (1.5 * p - 1.0), 0.5, 8.0);
}

/// int_a^inf g over a finite piece and a mapped tail.
template <class G>
cplx half_line_integral(const Potential& pot, G&& g, double a, double split, const DetOptions& opts,
                        const char* what) {
  cplx total = 0.0;
  if (split > a) {
    const auto r = integrate_gk(g, a, split, opts.quad_abs_tol, opts.quad_rel_tol, 4000);
    if (!r.converged) throw NumericalError(std::string(what) + ": quadrature did not converge", a);
    total += r.value;
  }
  const double B = std::max(a, split);
  const double m = tail_map_exponent(pot);
  auto mapped = [&](double t) -> cplx {
    const double x = B * std::pow(t, -m);
    if (!std::isfinite(x) || x > 1e150) return 0.0;
    return m * x / t * g(x);
  };
  const auto r = integrate_gk(mapped, 0.0, 1.0, opts.quad_abs_tol, opts.quad_rel_tol, 4000);
  if (!r.converged) throw NumericalError(std::string(what) + ": tail quadrature did not converge", B);
  return total + r.value;
}

double split_point(const Potential& pot, cplx z, cplx z0, double x0) {
  const double level = std::max({z.real(), z0.real(), 0.0});
  return std::max(2.0 * x0, 2.0 * pot.turning_point(level) + x0);
}

/// D(z) and D'(z) at 0 from the x0-normalized decaying solution.
struct Characteristic {
  ScaledValue D;
  cplx log_derivative;
};

Characteristic characteristic_with_derivative(const Potential& pot, const BoundaryCondition& bc, cplx z,
                                              const DetOptions& opts) {
  JostOptions jo;
  jo.normalization = Normalization::Reference;
  const AugmentedState s = jost_solution_with_zderiv(pot, z, opts.integrator, jo).at_zero;
  const cplx D = bc.sin() * s.base.du + bc.cos() * s.base.u;
  const cplx Dd = bc.sin() * s.zder_du + bc.cos() * s.zder_u;
  if (std::abs(D) < 10.0 * opts.integrator.rel_tol * s.base.mantissa_max()) {
    throw PoleProximityError("spectral parameter is numerically an eigenvalue", z.real());
  }
  return {{D, s.base.log_scale}, Dd / D};
}

ScaledValue characteristic_value(const Potential& pot, const BoundaryCondition& bc, cplx z,
                                 const DetOptions& opts) {
  JostOptions jo;
  jo.normalization = Normalization::Reference;
  const ScaledState s = jost_solution(pot, z, opts.integrator, jo).at_zero;
  return {bc.sin() * s.du + bc.cos() * s.u, s.log_scale};
}

/// log(1 - w) + w without cancellation for small w.
cplx log_factor(cplx w) {
  if (std::abs(w) < 0.1) {
    cplx sum = 0.0;
    cplx power = w;
    for (int j = 2; j < 60; ++j) {
      power *= w;
      const cplx term = power / static_cast<double>(j);
      sum -= term;
      if (std::abs(term) < 1e-18 * std::max(1e-300, std::abs(sum))) break;
    }
    return sum;
  }
  return std::log(1.0 - w) + w;
}

double tail_decay(const Spectrum& spec, double factor) { return factor * spec.weyl_tail.gamma; }

/// The z0 data of det2 are shared by every z on a grid.
class Det2Evaluator {
 public:
  Det2Evaluator(const Potential& pot, const BoundaryCondition& bc, cplx z0, double x0, const DetOptions& opts)
      : pot_(pot.with_x0(x0)), bc_(bc), z0_(z0), x0_(x0), opts_(opts) {
    require_trace_class(pot_);
    require_off_cut(pot_, z0, x0);
    base_ = characteristic_with_derivative(pot_, bc_, z0_, opts_);
  }

  cplx boundary_z0() const { return base_.log_derivative; }

  Det2Closed evaluate(cplx z) const {
    Det2Closed out;
    if (z == z0_) {
      out.value = 1.0;
      out.log = 0.0;
      return out;
    }
    require_off_cut(pot_, z, x0_);
    const ScaledValue Dz = characteristic_value(pot_, bc_, z, opts_);
    out.log_boundary_ratio = std::log(Dz.mantissa / base_.D.mantissa) + (Dz.log_scale - base_.D.log_scale);
    out.log_exp_factor = -(z - z0_) * base_.log_derivative;
    out.log_correction = -0.5 * segment_integral(z, out.segment_nodes);
    out.log = out.log_boundary_ratio + out.log_exp_factor + out.log_correction;
    double re = out.log.real();
    if (re > kMaxLog) {
      out.overflow = true;
      re = kMaxLog;
      out.warnings.push_back("det2 modulus exceeds exp(700); value capped, log is exact");
    }
    out.value = std::polar(std::exp(re), out.log.imag());
    return out;
  }

 private:
  /// int_{z0}^z I(zeta, z0, x0) dzeta on the straight segment, Gauss-Legendre doubled until stable.
  cplx segment_integral(cplx z, int& nodes_used) const {
    const cplx half = 0.5 * (z - z0_);
    auto rule_value = [&](int n) {
      const GaussLegendreRule rule = gauss_legendre(n);
      cplx sum = 0.0;
      for (int i = 0; i < n; ++i) {
        const cplx zeta = z0_ + half * (rule.nodes[i] + 1.0);
        sum += rule.weights[i] * correction_integral(pot_, zeta, z0_, x0_, opts_);
      }
      return half * sum;
    };
    int n = 32;
    cplx prev = rule_value(n);
    while (true) {
      n *= 2;
      const cplx next = rule_value(n);
      if (std::abs(next - prev) <= opts_.segment_tol * std::max(1.0, std::abs(next))) {
        nodes_used = n;
        return next;
      }
      if (n >= 512) throw NumericalError("z-segment quadrature of the correction integral did not settle", z.real());
      prev = next;
    }
  }

  Potential pot_;
  BoundaryCondition bc_;
  cplx z0_;
  double x0_;
  DetOptions opts_;
  Characteristic base_;
};

}  // namespace

cplx correction_integral(const Potential& pot, cplx z, cplx z0, double x0, const DetOptions& opts) {
  require_trace_class(pot);
  if (!(x0 > 0.0)) throw UsageError("x0 must be positive");
  require_off_cut(pot, z, x0);
  require_off_cut(pot, z0, x0);
  if (z == z0) return 0.0;
  auto g = [&](double x) -> cplx {
    const double q = pot.q(x);
    const cplx s = std::sqrt(q - z), s0 = std::sqrt(q - z0);
    return (z - z0) / (s * s0 * (s + s0));
  };
  return half_line_integral(pot, g, x0, split_point(pot, z, z0, x0), opts, "correction integral");
}

cplx characteristic_log_derivative(const Potential& pot, const BoundaryCondition& bc, cplx z, double x0,
                                   const DetOptions& opts) {
  const Potential p = pot.with_x0(x0);
  require_off_cut(p, z, x0);
  return characteristic_with_derivative(p, bc, z, opts).log_derivative;
}

TraceClosed trace_closed(const Potential& pot, const BoundaryCondition& bc, cplx z, cplx z0, double x0,
                         const DetOptions& opts) {
  require_trace_class(pot);
  TraceClosed out;
  if (z == z0) return out;
  out.boundary_z0 = characteristic_log_derivative(pot, bc, z0, x0, opts);
  out.boundary_z = characteristic_log_derivative(pot, bc, z, x0, opts);
  out.correction = correction_integral(pot, z, z0, x0, opts);
  out.value = out.boundary_z0 - out.boundary_z + 0.5 * out.correction;
  return out;
}

SpectralSum trace_spectral(const Spectrum& spec, cplx z, cplx z0) {
  SpectralSum out;
  out.terms = spec.eigenvalues.size();
  auto term = [&](double lambda) { return (z - z0) / ((lambda - z) * (lambda - z0)); };
  for (double lambda : spec.eigenvalues) out.partial += term(lambda);
  const double decay = tail_decay(spec, 2.0);
  if (!spec.weyl_tail.valid) {
    out.note = "no Weyl tail: " + spec.weyl_tail.note;
  } else if (!(decay > 1.0)) {
    out.note = "no Weyl tail: summand decays too slowly";
  } else {
    out.tail = tail_sum([&](double k) { return term(spec.weyl_tail.eigenvalue(k)); }, out.terms, decay);
    out.tail_applied = true;
  }
  out.value = out.partial + out.tail;
  return out;
}

std::vector<cplx> green_diagonal(const Potential& pot, const BoundaryCondition& bc, cplx z,
                                 const std::vector<double>& xs, const IntegratorOptions& opts) {
  if (xs.empty()) return {};
  if (!std::is_sorted(xs.begin(), xs.end()) || xs.front() < 0.0) {
    throw UsageError("green_diagonal needs ascending points in [0, inf)");
  }
  const std::size_t n = xs.size();
  std::vector<ScaledState> phi(n), f(n);

  ScaledState state = regular_solution(pot, bc, z, 0.0, opts, RegularKind::Phi);
  for (std::size_t i = 0; i < n; ++i) {
    if (xs[i] > state.x) state = integrate(pot, z, state, xs[i], opts);
    phi[i] = state;
  }

  const double X = std::max(default_x_cap(pot, z), xs.back() + 10.0);
  SeedOptions seed;
  seed.normalization = Normalization::Cap;
  seed.direction_only = true;
  state = wkb_seed(pot, z, X, seed);
  for (std::size_t i = n; i-- > 0;) {
    if (xs[i] < state.x) state = integrate(pot, z, state, xs[i], opts);
    f[i] = state;
  }
  if (state.x > 0.0) state = integrate(pot, z, state, 0.0, opts);
  const cplx D = bc.sin() * state.du + bc.cos() * state.u;
  if (std::abs(D) < 10.0 * opts.rel_tol * state.mantissa_max()) {
    throw PoleProximityError("spectral parameter is numerically an eigenvalue", z.real());
  }

  std::vector<cplx> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = phi[i].u * f[i].u / D * std::exp(phi[i].log_scale + f[i].log_scale - state.log_scale);
  }
  return out;
}

GreenTrace trace_green_diag(const Potential& pot, const BoundaryCondition& bc, cplx z, cplx z0,
                            const DetOptions& opts) {
  require_trace_class(pot);
  GreenTrace out;
  if (z == z0) return out;
  out.R = std::max(default_x_cap(pot, z), default_x_cap(pot, z0));
  const GaussLegendreRule rule = gauss_legendre(12);

  auto window = [&](double scale, int& panels) {
    std::vector<double> nodes, weights;
    double a = 0.0;
    panels = 0;
    while (a < out.R) {
      const double q = pot.q(a);
      const double rate = std::sqrt(std::max({std::abs(q - z), std::abs(q - z0), 1.0}));
      const double b = std::min(out.R, a + scale * std::min(1.0, 2.0 / rate));
      const double half = 0.5 * (b - a);
      for (int i = 0; i < 12; ++i) {
        nodes.push_back(a + half * (rule.nodes[i] + 1.0));
        weights.push_back(half * rule.weights[i]);
      }
      a = b;
      ++panels;
    }
    const std::vector<cplx> g = green_diagonal(pot, bc, z, nodes, opts.integrator);
    const std::vector<cplx> g0 = green_diagonal(pot, bc, z0, nodes, opts.integrator);
    cplx sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * (g[i] - g0[i]);
    return sum;
  };

  double scale = 1.0;
  int panels = 0;
  cplx prev = window(scale, panels);
  for (int pass = 0;; ++pass) {
    scale *= 0.5;
    const cplx next = window(scale, panels);
    out.refinement_change = std::abs(next - prev);
    prev = next;
    if (out.refinement_change <= std::max(1e-11, 1e-10 * std::abs(next))) break;
    if (pass >= 5) throw NumericalError("Green-diagonal window quadrature did not settle", out.R);
  }
  out.window = prev;
  out.panels = panels;

  auto asym = [&](double x) { return wkb_green_diagonal_difference(pot, z, z0, x); };
  out.tail = half_line_integral(pot, asym, out.R, out.R, opts, "Green-diagonal tail");
  out.value = out.window + out.tail;
  return out;
}

Det2Closed det2_closed(const Potential& pot, const BoundaryCondition& bc, cplx z, cplx z0, double x0,
                       const DetOptions& opts) {
  if (z == z0) {
    Det2Closed out;
    out.value = 1.0;
    return out;
  }
  const Det2Evaluator eval(pot, bc, z0, x0, opts);
  Det2Closed out = eval.evaluate(z);
  if (z.imag() == 0.0 && z0.imag() == 0.0) {
    const long below_z = count_eigenvalues_below(pot, bc, z.real(), {1e-8, 1e-10}).count;
    const long below_z0 = count_eigenvalues_below(pot, bc, z0.real(), {1e-8, 1e-10}).count;
    if (below_z != below_z0) {
      out.warnings.push_back("segment from z0 to z crosses the spectrum; zeros of det2 on it are genuine");
    }
  }
  return out;
}

Det2Spectral det2_spectral(const Spectrum& spec, cplx z, cplx z0) {
  Det2Spectral out;
  out.terms = spec.eigenvalues.size();
  auto term = [&](double lambda) { return log_factor((z - z0) / (lambda - z0)); };
  for (double lambda : spec.eigenvalues) out.log_partial += term(lambda);
  const double decay = tail_decay(spec, 2.0);
  if (!spec.weyl_tail.valid) {
    out.note = "no Weyl tail: " + spec.weyl_tail.note;
  } else if (!(decay > 1.0)) {
    out.note = "no Weyl tail: summand decays too slowly";
  } else {
    out.log_tail = tail_sum([&](double k) { return term(spec.weyl_tail.eigenvalue(k)); }, out.terms, decay);
    out.tail_applied = true;
  }
  out.log = out.log_partial + out.log_tail;
  out.value = std::polar(std::exp(std::min(out.log.real(), kMaxLog)), out.log.imag());
  return out;
}

IdentityReport verify_trace_identity(const Potential& pot, const BoundaryCondition& bc, const std::vector<cplx>& z_grid,
                                     cplx z0, double x0, const DetOptions& opts) {
  IdentityReport report;
  report.z0 = z0;
  report.x0 = x0;
  const Det2Evaluator eval(pot, bc, z0, x0, opts);
  auto log_det = [&](cplx z) { return eval.evaluate(z).log; };
  for (const cplx z : z_grid) {
    IdentityPoint pt;
    pt.z = z;
    pt.trace = trace_closed(pot, bc, z, z0, x0, opts).value;
    // Shrink the step until two successive Richardson estimates agree.
    double h = 2e-2 * std::max(1.0, std::abs(z - z0));
    cplx d = derivative_of_log(log_det, z, h);
    for (int i = 0; i < 4; ++i) {
      h *= 0.5;
      const cplx next = derivative_of_log(log_det, z, h);
      const bool settled = std::abs(next - d) < 1e-9 * std::max(1.0, std::abs(next));
      d = next;
      if (settled) break;
    }
    pt.minus_dlog_det = -d;
    pt.residual = std::abs(pt.trace - pt.minus_dlog_det);
    report.max_residual = std::max(report.max_residual, pt.residual);
    report.points.push_back(pt);
  }
  return report;
}

TwoConditionTrace trace_two_bc(const Potential& pot, const BoundaryCondition& a1, const BoundaryCondition& a2,
                               cplx z, cplx z0, double x0, const DetOptions& opts) {
  require_trace_class(pot);
  TwoConditionTrace out;
  out.boundary_z0 = characteristic_log_derivative(pot, a1, z0, x0, opts);
  out.boundary_z = characteristic_log_derivative(pot, a2, z, x0, opts);
  if (z != z0) out.correction = correction_integral(pot, z, z0, x0, opts);
  out.value = out.boundary_z0 - out.boundary_z + 0.5 * out.correction;
  return out;
}

SpectralSum trace_spectral_two_bc(const Spectrum& s1, const Spectrum& s2, cplx z, cplx z0) {
  SpectralSum out;
  out.terms = std::min(s1.eigenvalues.size(), s2.eigenvalues.size());
  auto term = [&](double l1, double l2) { return 1.0 / (l2 - z) - 1.0 / (l1 - z0); };
  for (std::size_t k = 0; k < out.terms; ++k) out.partial += term(s1.eigenvalues[k], s2.eigenvalues[k]);
  const WeylTail& w1 = s1.weyl_tail;
  const WeylTail& w2 = s2.weyl_tail;
  const double decay = std::min(1.0 + w1.gamma, 2.0 * w1.gamma);
  if (!w1.valid || !w2.valid) {
    out.note = "no Weyl tail: " + (w1.valid ? w2.note : w1.note);
  } else if (w1.gamma != w2.gamma || !(decay > 1.0)) {
    out.note = "no Weyl tail: summand decays too slowly";
  } else {
    // Both spectra share the leading Weyl constant; only the shifts differ. The difference of the
    // model eigenvalues is formed without cancellation.
    const double A = 0.5 * (w1.A + w2.A);
    const double g = w1.gamma;
    auto tail_term = [&](double k) -> cplx {
      const double L1 = std::log1p(w1.shift / k), L2 = std::log1p(w2.shift / k);
      const double base = A * std::pow(k, g);
      const double l1 = base * std::exp(g * L1), l2 = base * std::exp(g * L2);
      const double gap = base * std::exp(g * L2) * std::expm1(g * (L1 - L2));
      return (gap + (z - z0)) / ((l2 - z) * (l1 - z0));
    };
    out.tail = tail_sum(tail_term, out.terms, decay);
    out.tail_applied = true;
  }
  out.value = out.partial + out.tail;
  return out;
}

ZeroOrderFit fit_zero_order(const Potential& pot, const BoundaryCondition& bc, double lambda, cplx z0, double x0,
                            const DetOptions& opts) {
  ZeroOrderFit fit;
  const Det2Evaluator eval(pot, bc, z0, x0, opts);
  fit.offsets = {1e-2, 5e-3, 2e-3, 1e-3, 5e-4, 2e-4};
  for (double eps : fit.offsets) fit.log_moduli.push_back(eval.evaluate(cplx(lambda - eps)).log.real());
  // log|det| = n log(eps) + c + d eps by least squares.
  std::array<std::array<double, 3>, 3> A{};
  std::array<double, 3> rhs{};
  for (std::size_t i = 0; i < fit.offsets.size(); ++i) {
    const std::array<double, 3> row{std::log(fit.offsets[i]), 1.0, fit.offsets[i]};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) A[r][c] += row[r] * row[c];
      rhs[r] += row[r] * fit.log_moduli[i];
    }
  }
  for (int col = 0; col < 3; ++col) {
    for (int r = col + 1; r < 3; ++r) {
      const double f = A[r][col] / A[col][col];
      for (int c = col; c < 3; ++c) A[r][c] -= f * A[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  std::array<double, 3> sol{};
  for (int r = 2; r >= 0; --r) {
    double acc = rhs[r];
    for (int c = r + 1; c < 3; ++c) acc -= A[r][c] * sol[c];
    sol[r] = acc / A[r][r];
  }
  fit.order = sol[0];
  return fit;
}

// ---------------------------------------------------------------------------

namespace {

DetTraceReport report_header(const char* quantity, const BoundaryCondition& bc, cplx z, cplx z0, double x0) {
  DetTraceReport r;
  r.quantity = quantity;
  r.z = z;
  r.z0 = z0;
  r.x0 = x0;
  r.alpha = bc;
  return r;
}

void add_spectral_note(DetTraceReport& r, bool applied, const std::string& note) {
  if (!applied) r.warnings.push_back(note);
}

}  // namespace

DetTraceReport trace_report(const Potential& pot, const BoundaryCondition& bc, cplx z, cplx z0, double x0,
                            const ReportOptions& opts) {
  DetTraceReport r = report_header("trace", bc, z, z0, x0);
  const TraceClosed closed = trace_closed(pot, bc, z, z0, x0, opts.det);
  r.closed_form = closed.value;
  r.terms = {{"boundary_term_z0", closed.boundary_z0},
             {"boundary_term_z", -closed.boundary_z},
             {"half_correction_integral", 0.5 * closed.correction}};
  r.correction = closed.correction;
  if (opts.green) {
    r.green_diag = trace_green_diag(pot, bc, z, z0, opts.det).value;
    r.residuals.push_back({"closed_vs_green", std::abs(r.closed_form - *r.green_diag)});
  }
  if (opts.eigenvalues > 0) {
    const Spectrum spec = find_eigenvalues(pot, bc, opts.eigenvalues, opts.eigen);
    const SpectralSum s = trace_spectral(spec, z, z0);
    r.spectral = s.value;
    r.n_eigenvalues_used = s.terms;
    r.tail_correction = s.tail;
    add_spectral_note(r, s.tail_applied, s.note);
    r.residuals.push_back({"closed_vs_spectral", std::abs(r.closed_form - s.value)});
    if (r.green_diag) r.residuals.push_back({"green_vs_spectral", std::abs(*r.green_diag - s.value)});
  }
  return r;
}

DetTraceReport two_bc_trace_report(const Potential& pot, const BoundaryCondition& a1, const BoundaryCondition& a2,
                                   cplx z, cplx z0, double x0, const ReportOptions& opts) {
  DetTraceReport r = report_header("trace", a1, z, z0, x0);
  r.alpha2 = a2;
  const TwoConditionTrace closed = trace_two_bc(pot, a1, a2, z, z0, x0, opts.det);
  r.closed_form = closed.value;
  r.terms = {{"boundary_term_z0", closed.boundary_z0},
             {"boundary_term_z", -closed.boundary_z},
             {"half_correction_integral", 0.5 * closed.correction}};
  r.correction = closed.correction;
  if (opts.eigenvalues > 0) {
    const Spectrum s1 = find_eigenvalues(pot, a1, opts.eigenvalues, opts.eigen);
    const Spectrum s2 = find_eigenvalues(pot, a2, opts.eigenvalues, opts.eigen);
    const SpectralSum s = trace_spectral_two_bc(s1, s2, z, z0);
    r.spectral = s.value;
    r.n_eigenvalues_used = s.terms;
    r.tail_correction = s.tail;
    add_spectral_note(r, s.tail_applied, s.note);
    r.residuals.push_back({"closed_vs_spectral", std::abs(r.closed_form - s.value)});
  }
  return r;
}

DetTraceReport det2_report(const Potential& pot, const BoundaryCondition& bc, cplx z, cplx z0, double x0,
                           const ReportOptions& opts) {
  DetTraceReport r = report_header("det2", bc, z, z0, x0);
  const Det2Closed closed = det2_closed(pot, bc, z, z0, x0, opts.det);
  r.closed_form = closed.value;
  r.log_closed_form = closed.log;
  r.terms = {{"log_boundary_ratio", closed.log_boundary_ratio},
             {"exp_factor_log", closed.log_exp_factor},
             {"correction_log", closed.log_correction}};
  r.warnings = closed.warnings;
  if (opts.eigenvalues > 0) {
    const Spectrum spec = find_eigenvalues(pot, bc, opts.eigenvalues, opts.eigen);
    const Det2Spectral s = det2_spectral(spec, z, z0);
    r.spectral = s.value;
    r.n_eigenvalues_used = s.terms;
    r.tail_correction = s.log_tail;
    add_spectral_note(r, s.tail_applied, s.note);
    r.residuals.push_back({"closed_vs_spectral_relative", std::abs(r.closed_form - s.value) / std::abs(r.closed_form)});
  }
  return r;
}

}  // namespace specdet
