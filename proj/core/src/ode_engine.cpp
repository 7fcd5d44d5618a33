#include "specdet/ode_engine.hpp"

#include <array>
#include <cmath>
#include <ostream>

#include "specdet/errors.hpp"
#include "rk_driver.hpp"

namespace specdet {

using detail::Vec;

ScaledState integrate(const Potential& pot, cplx z, const ScaledState& from, double x_to,
                      const IntegratorOptions& opts, const StepObserver& observer) {
  if (!std::isfinite(x_to)) throw UsageError("integration target must be finite");
  if (from.u == 0.0 && from.du == 0.0) throw UsageError("initial state is identically zero");
  Vec<cplx, 2> y{from.u, from.du};
  double log_scale = from.log_scale;
  auto rhs = [&](double x, const Vec<cplx, 2>& v) -> Vec<cplx, 2> {
    return {v[1], (detail::checked_q(pot, x) - z) * v[0]};
  };
  auto rate = [&](double x) { return std::sqrt(std::abs(pot.q(x) - z)) + 1.0; };
  auto observe = [&](double x, const Vec<cplx, 2>& v, double ls) {
    if (observer) observer(ScaledState{v[0], v[1], ls, x});
  };
  const double x = detail::drive<cplx, 2>(rhs, rate, from.x, y, log_scale, x_to, opts, observe);
  detail::canonicalize<cplx, 2>(y, log_scale);
  return {y[0], y[1], log_scale, x};
}

AugmentedState integrate_augmented(const Potential& pot, cplx z, const AugmentedState& from, double x_to,
                                   const IntegratorOptions& opts) {
  if (!std::isfinite(x_to)) throw UsageError("integration target must be finite");
  if (from.base.u == 0.0 && from.base.du == 0.0) throw UsageError("initial state is identically zero");
  Vec<cplx, 4> y{from.base.u, from.base.du, from.zder_u, from.zder_du};
  double log_scale = from.base.log_scale;
  auto rhs = [&](double x, const Vec<cplx, 4>& v) -> Vec<cplx, 4> {
    const cplx Q = detail::checked_q(pot, x) - z;
    return {v[1], Q * v[0], v[3], Q * v[2] - v[0]};
  };
  auto rate = [&](double x) { return std::sqrt(std::abs(pot.q(x) - z)) + 1.0; };
  const double x = detail::drive<cplx, 4>(rhs, rate, from.base.x, y, log_scale, x_to, opts,
                                          [](double, const Vec<cplx, 4>&, double) {});
  detail::canonicalize<cplx, 4>(y, log_scale);
  AugmentedState out;
  out.base = {y[0], y[1], log_scale, x};
  out.zder_u = y[2];
  out.zder_du = y[3];
  return out;
}

ScaledState regular_solution(const Potential& pot, const BoundaryCondition& bc, cplx z, double x_to,
                             const IntegratorOptions& opts, RegularKind which) {
  if (!(x_to >= 0.0)) throw UsageError("regular solutions are defined for x >= 0");
  ScaledState start;
  start.x = 0.0;
  if (which == RegularKind::Phi) {
    start.u = -bc.sin();
    start.du = bc.cos();
  } else {
    start.u = bc.cos();
    start.du = bc.sin();
  }
  if (x_to == 0.0) return start;
  return integrate(pot, z, start, x_to, opts);
}

// ---------------------------------------------------------------------------

namespace {

struct SeedGeometry {
  double turning = 0.0;
  double clearance = 10.0;
};

SeedGeometry seed_geometry(const Potential& pot, cplx z) {
  SeedGeometry g;
  const double level = z.real();
  g.turning = pot.turning_point(level);
  auto phase = [&](double d) {
    auto integrand = [&](double x) { return std::sqrt(std::max(pot.q(x) - level, 0.0)); };
    return integrate_gk(integrand, g.turning, g.turning + d, 1e-6, 1e-6, 200).value;
  };
  while (phase(g.clearance) < 40.0 && g.turning + g.clearance < 1e6) g.clearance *= 2.0;
  return g;
}

double seed_point(const Potential& pot, const SeedGeometry& g, double clearance) {
  return std::max(2.0 * pot.x0(), g.turning + clearance);
}

constexpr double kMaxCap = 1e6;

double relative_change(const ScaledState& a, const ScaledState& b, Normalization norm) {
  if (norm == Normalization::Cap) {
    // Projective distance: the cap normalization moves with X.
    const double na = std::hypot(std::abs(a.u), std::abs(a.du));
    const double nb = std::hypot(std::abs(b.u), std::abs(b.du));
    return std::abs(a.u * b.du - a.du * b.u) / (na * nb);
  }
  const double shift = b.log_scale - a.log_scale;
  const double f = std::exp(shift);
  const double diff = std::max(std::abs(a.u - b.u * f), std::abs(a.du - b.du * f));
  return diff / a.mantissa_max();
}

double relative_change(const AugmentedState& a, const AugmentedState& b, Normalization norm) {
  double change = relative_change(a.base, b.base, norm);
  if (norm == Normalization::Reference) {
    const double f = std::exp(b.base.log_scale - a.base.log_scale);
    const double scale = std::max({std::abs(a.zder_u), std::abs(a.zder_du), a.base.mantissa_max()});
    change = std::max(change, std::max(std::abs(a.zder_u - b.zder_u * f), std::abs(a.zder_du - b.zder_du * f)) / scale);
  } else {
    // Compare the normalization-free ratios d/dz log of (u, u') up to a common shift.
    auto ratio = [](const AugmentedState& s) { return s.zder_u / s.base.u - s.zder_du / s.base.du; };
    if (a.base.u != 0.0 && a.base.du != 0.0) {
      const cplx ra = ratio(a), rb = ratio(b);
      change = std::max(change, std::abs(ra - rb) / std::max(1.0, std::abs(ra)));
    }
  }
  return change;
}

}  // namespace

double default_x_cap(const Potential& pot, cplx z) {
  const SeedGeometry g = seed_geometry(pot, z);
  return seed_point(pot, g, g.clearance);
}

JostResult jost_solution(const Potential& pot, cplx z, const IntegratorOptions& opts, const JostOptions& jost) {
  const SeedOptions seed{jost.normalization, jost.max_order};
  auto solve = [&](double X, std::vector<ScaledState>* traj) {
    const ScaledState s = wkb_seed(pot, z, X, seed);
    StepObserver obs;
    if (traj) {
      traj->push_back(s);
      obs = [traj](const ScaledState& st) { traj->push_back(st); };
    }
    return integrate(pot, z, s, 0.0, opts, obs);
  };

  JostResult out;
  if (jost.x_cap) {
    out.x_cap = *jost.x_cap;
    out.at_zero = solve(out.x_cap, jost.record_trajectory ? &out.trajectory : nullptr);
    return out;
  }
  const SeedGeometry g = seed_geometry(pot, z);
  double clearance = g.clearance;
  double X = seed_point(pot, g, clearance);
  ScaledState prev = solve(X, nullptr);
  const double target = 100.0 * opts.rel_tol;
  while (true) {
    clearance *= 2.0;
    const double X_next = seed_point(pot, g, clearance);
    if (X_next > kMaxCap) throw NumericalError("seed point did not stabilize below 1e6; increase X_cap", X);
    std::vector<ScaledState> traj;
    const ScaledState next = solve(X_next, jost.record_trajectory ? &traj : nullptr);
    ++out.doublings;
    out.stability = relative_change(next, prev, jost.normalization);
    X = X_next;
    if (out.stability < target) {
      out.at_zero = next;
      out.x_cap = X;
      out.trajectory = std::move(traj);
      return out;
    }
    prev = next;
  }
}

JostAugmentedResult jost_solution_with_zderiv(const Potential& pot, cplx z, const IntegratorOptions& opts,
                                              const JostOptions& jost) {
  const SeedOptions seed{jost.normalization, jost.max_order};
  auto solve = [&](double X) { return integrate_augmented(pot, z, wkb_seed_zderiv(pot, z, X, seed), 0.0, opts); };
  JostAugmentedResult out;
  if (jost.x_cap) {
    out.x_cap = *jost.x_cap;
    out.at_zero = solve(out.x_cap);
    return out;
  }
  const SeedGeometry g = seed_geometry(pot, z);
  double clearance = g.clearance;
  double X = seed_point(pot, g, clearance);
  AugmentedState prev = solve(X);
  const double target = 100.0 * opts.rel_tol;
  while (true) {
    clearance *= 2.0;
    const double X_next = seed_point(pot, g, clearance);
    if (X_next > kMaxCap) throw NumericalError("seed point did not stabilize below 1e6; increase X_cap", X);
    const AugmentedState next = solve(X_next);
    ++out.doublings;
    out.stability = relative_change(next, prev, jost.normalization);
    X = X_next;
    if (out.stability < target) {
      out.at_zero = next;
      out.x_cap = X;
      return out;
    }
    prev = next;
  }
}

ScaledValue wronskian(const ScaledState& a, const ScaledState& b) {
  return {a.u * b.du - a.du * b.u, a.log_scale + b.log_scale};
}

void write_trajectory_csv(std::ostream& out, const std::vector<ScaledState>& trajectory) {
  out << "x,re_u,im_u,re_du,im_du,log_scale\n";
  const auto old = out.precision(17);
  for (const auto& s : trajectory) {
    out << s.x << ',' << s.u.real() << ',' << s.u.imag() << ',' << s.du.real() << ',' << s.du.imag() << ','
        << s.log_scale << '\n';
  }
  out.precision(old);
}

}  // namespace specdet
