#include "specdet/spectrum.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <sstream>

#include <boost/math/tools/toms748_solve.hpp>
#include <boost/numeric/odeint.hpp>

#include "specdet/errors.hpp"
#include "specdet/parallel.hpp"
#include "rk_driver.hpp"

namespace specdet {

namespace {

/// A level safely below the ground state: q_min minus the Robin binding energy.
double spectral_floor(const Potential& pot, const BoundaryCondition& bc) {
  double floor = pot.lower_bound() - 1.0;
  if (bc.alpha() > 0.0 && bc.alpha() < kPi / 2.0) {
    const double kappa = bc.cos() / bc.sin();
    floor -= kappa * kappa;
  }
  return floor;
}

/// Bohr-Sommerfeld density dN/dlambda with N = (1/pi) int_0^{x_t} sqrt(lambda - q).
double bohr_sommerfeld_density(const Potential& pot, double lambda) {
  auto count = [&](double level) {
    const double xt = pot.turning_point(level);
    if (xt <= 0.0) return 0.0;
    auto integrand = [&](double x) { return std::sqrt(std::max(level - pot.q(x), 0.0)); };
    return integrate_gk(integrand, 0.0, xt, 1e-9, 1e-8, 200).value / kPi;
  };
  const double delta = 1e-2 * std::max(1.0, std::abs(lambda));
  return (count(lambda + delta) - count(lambda - delta)) / (2.0 * delta);
}

struct AngleSample {
  double angle = 0.0;
  double residual = 0.0;  // |cos a u + sin a u'| / max(|u|, |u'|)
};

/// Unwrapped atan2(f, f') at 0 of the cap-normalized decaying solution for real lambda.
AngleSample angle_at_zero(const Potential& pot, const BoundaryCondition& bc, double lambda, double X,
                          const IntegratorOptions& opts) {
  const ScaledState seed = wkb_seed(pot, cplx(lambda), X, {Normalization::Cap, -1, true});
  detail::Vec<double, 2> y{seed.u.real(), seed.du.real()};
  double log_scale = seed.log_scale;
  double prev = std::atan2(y[0], y[1]);
  double omega = prev;
  auto track = [&](double, const detail::Vec<double, 2>& v, double) {
    const double raw = std::atan2(v[0], v[1]);
    omega += std::remainder(raw - prev, 2.0 * kPi);
    prev = raw;
  };
  detail::integrate_real(pot, lambda, X, y, log_scale, 0.0, opts, track);
  AngleSample out;
  out.angle = omega;
  out.residual = std::abs(bc.cos() * y[0] + bc.sin() * y[1]) / std::max(std::abs(y[0]), std::abs(y[1]));
  return out;
}

long count_from_angle(const BoundaryCondition& bc, double omega) {
  const double beta = bc.boundary_angle();
  if (omega >= beta) return 0;
  return static_cast<long>(std::ceil((beta - omega) / kPi));
}

struct Cell {
  double lo, hi;
  long count_lo, count_hi;
};

}  // namespace

double WeylTail::eigenvalue(double k) const { return A * std::pow(k + shift, gamma); }

ScaledValue characteristic_function(const Potential& pot, const BoundaryCondition& bc, cplx z,
                                    const IntegratorOptions& opts, Normalization norm) {
  JostOptions jo;
  jo.normalization = norm;
  const ScaledState s = jost_solution(pot, z, opts, jo).at_zero;
  return {bc.sin() * s.du + bc.cos() * s.u, s.log_scale};
}

EigenCount count_eigenvalues_below(const Potential& pot, const BoundaryCondition& bc, double lambda,
                                   const IntegratorOptions& opts) {
  const AngleSample s = angle_at_zero(pot, bc, lambda, default_x_cap(pot, cplx(lambda)), opts);
  return {count_from_angle(bc, s.angle), s.angle};
}

Spectrum find_eigenvalues(const Potential& pot, const BoundaryCondition& bc, std::size_t count,
                          const EigenOptions& opts) {
  if (count == 0) throw UsageError("eigenvalue count must be at least 1");
  const long wanted = static_cast<long>(count);

  // Scan grid: half a Bohr-Sommerfeld spacing per step.
  double lambda = spectral_floor(pot, bc);
  while (count_eigenvalues_below(pot, bc, lambda, opts.scan).count > 0) lambda -= 2.0 * std::abs(lambda) + 1.0;

  std::map<double, long> counts;
  counts[lambda] = 0;
  long reached = 0;
  while (reached < wanted) {
    std::vector<double> grid;
    double level = lambda;
    double predicted = 0.0;
    // Enough new points to cover the remaining eigenvalues by the Bohr-Sommerfeld estimate.
    while (predicted < static_cast<double>(wanted - reached) + 2.0) {
      const double density = bohr_sommerfeld_density(pot, level);
      const double step = density > 0.0 ? std::min(0.5 / density, std::max(2.0, 0.25 * std::abs(level))) : 2.0;
      level += step;
      predicted += step * density + (density > 0.0 ? 0.0 : 0.25);
      grid.push_back(level);
    }
    std::vector<long> found(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
      found[i] = count_eigenvalues_below(pot, bc, grid[i], opts.scan).count;
    });
    for (std::size_t i = 0; i < grid.size(); ++i) counts[grid[i]] = found[i];
    lambda = grid.back();
    reached = found.back();
  }

  // Split cells holding more than one root.
  for (int pass = 0;; ++pass) {
    std::vector<double> splits;
    for (auto it = counts.begin(); std::next(it) != counts.end(); ++it) {
      const auto nx = std::next(it);
      if (it->second >= wanted) break;
      if (nx->second - it->second >= 2) splits.push_back(0.5 * (it->first + nx->first));
    }
    if (splits.empty()) break;
    if (pass >= opts.max_refinements) throw NumericalError("eigenvalue bracket refinement exhausted", splits.front());
    std::vector<long> found(splits.size());
    parallel_for(splits.size(), [&](std::size_t i) {
      found[i] = count_eigenvalues_below(pot, bc, splits[i], opts.scan).count;
    });
    for (std::size_t i = 0; i < splits.size(); ++i) counts[splits[i]] = found[i];
  }

  std::vector<Cell> cells;
  for (auto it = counts.begin(); std::next(it) != counts.end(); ++it) {
    const auto nx = std::next(it);
    if (it->second >= wanted) break;
    if (nx->second - it->second == 1) cells.push_back({it->first, nx->first, it->second, nx->second});
  }
  if (static_cast<long>(cells.size()) < wanted) throw NumericalError("eigenvalue brackets incomplete", lambda);
  cells.resize(count);

  Spectrum spec;
  spec.bc = bc;
  spec.eigenvalues.resize(count);
  spec.residuals.resize(count);
  spec.multiplicity.assign(count, 1);
  parallel_for(count, [&](std::size_t j) {
    const Cell& cell = cells[j];
    const double X = default_x_cap(pot, cplx(cell.hi));
    const double target = bc.boundary_angle() - static_cast<double>(cell.count_lo) * kPi;
    auto h = [&](double l) { return angle_at_zero(pot, bc, l, X, opts.polish).angle - target; };
    auto loose = [&](double l) { return angle_at_zero(pot, bc, l, X, opts.scan).angle - target; };
    double a = cell.lo, b = cell.hi;
    double fa = loose(a), fb = loose(b);
    // The scan used per-point seeds; nudge endpoints if a root sits on one.
    for (int i = 0; i < 20 && fa < 0.0; ++i) {
      a -= 1e-6 * (b - a) * (1 << i);
      fa = loose(a);
    }
    for (int i = 0; i < 20 && fb > 0.0; ++i) {
      b += 1e-6 * (b - a) * (1 << i);
      fb = loose(b);
    }
    if (fa < 0.0 || fb > 0.0) throw NumericalError("eigenvalue bracket lost its sign change", cell.lo);
    const double slope = (fb - fa) / (b - a);

    // Coarse root on the loose tolerance, then secant steps on the tight one.
    double guess = a;
    if (fa == 0.0) {
      guess = a;
    } else if (fb == 0.0) {
      guess = b;
    } else {
      auto stop = [](double x, double y) { return std::abs(x - y) <= 1e-9 * std::max(1.0, std::abs(x)); };
      std::uintmax_t iters = 100;
      double la = a, lb = b;
      const auto r = boost::math::tools::toms748_solve(loose, la, lb, fa, fb, stop, iters);
      guess = 0.5 * (r.first + r.second);
    }

    const double tol = 0.5 * opts.root_tol;
    // Loose endpoint signs can be wrong by the loose error, so the tight search may step past them.
    const double margin = 1e-6 * std::max(1.0, std::abs(b)) + 1e-6 * (b - a);
    const double lo = a - margin, hi = b + margin;
    // The bracket slope only seeds the first step; convergence is judged on true secant steps.
    double x0 = guess;
    AngleSample s0 = angle_at_zero(pot, bc, x0, X, opts.polish);
    double f0 = s0.angle - target;
    double x1 = std::clamp(x0 - f0 / slope, lo, hi);
    bool converged = f0 == 0.0;
    if (converged) x1 = x0;
    for (int it = 0; it < 12 && !converged; ++it) {
      const AngleSample s1 = angle_at_zero(pot, bc, x1, X, opts.polish);
      const double f1 = s1.angle - target;
      if (f1 == 0.0) {
        s0 = s1;
        converged = true;
        break;
      }
      double next = x1 - f1 / slope;
      if (f1 != f0) next = x1 - f1 * (x1 - x0) / (f1 - f0);
      if (!(next >= lo && next <= hi)) next = x1 - f1 / slope;
      x0 = x1;
      f0 = f1;
      s0 = s1;
      x1 = std::clamp(next, lo, hi);
      converged = std::abs(x1 - x0) <= tol * std::max(1.0, std::abs(x0));
    }
    if (!converged) {
      // Fall back to a bracketing solve at full accuracy.
      a = lo;
      b = hi;
      fa = h(a);
      fb = h(b);
      for (int i = 0; i < 20 && fa < 0.0; ++i) {
        a -= margin * (1 << i);
        fa = h(a);
      }
      for (int i = 0; i < 20 && fb > 0.0; ++i) {
        b += margin * (1 << i);
        fb = h(b);
      }
      if (fa < 0.0 || fb > 0.0) throw NumericalError("eigenvalue bracket lost its sign change", cell.lo);
      auto stop = [tol](double x, double y) { return std::abs(x - y) <= tol * std::max(1.0, std::abs(x)); };
      std::uintmax_t iters = 200;
      const auto r = boost::math::tools::toms748_solve(h, a, b, fa, fb, stop, iters);
      x1 = 0.5 * (r.first + r.second);
      s0 = angle_at_zero(pot, bc, x1, X, opts.polish);
    }
    x0 = x1;
    spec.eigenvalues[j] = x0;
    spec.residuals[j] = s0.residual;
  });

  for (std::size_t j = 1; j < count; ++j) {
    if (!(spec.eigenvalues[j] > spec.eigenvalues[j - 1])) {
      throw NumericalError("eigenvalues not strictly increasing", spec.eigenvalues[j]);
    }
  }
  spec.weyl_tail = fit_weyl_tail(pot, spec.eigenvalues);
  return spec;
}

WeylTail fit_weyl_tail(const Potential& pot, const std::vector<double>& eigenvalues) {
  WeylTail tail;
  tail.gamma = pot.weyl_exponent();
  const std::size_t n = eigenvalues.size();
  if (n < 8) {
    tail.note = "too few eigenvalues for a tail fit";
    return tail;
  }
  // Least squares for lambda^(1/gamma) = a k + b over the upper half.
  const std::size_t first = n / 2;
  double sk = 0, sy = 0, skk = 0, sky = 0;
  double m = 0;
  for (std::size_t i = first; i < n; ++i) {
    if (!(eigenvalues[i] > 0.0)) {
      tail.note = "nonpositive eigenvalue in the fitted range";
      return tail;
    }
    const double k = static_cast<double>(i + 1);
    const double y = std::pow(eigenvalues[i], 1.0 / tail.gamma);
    sk += k;
    sy += y;
    skk += k * k;
    sky += k * y;
    m += 1.0;
  }
  const double a = (m * sky - sk * sy) / (m * skk - sk * sk);
  const double b = (sy - a * sk) / m;
  if (!(a > 0.0)) {
    tail.note = "nonincreasing Weyl fit";
    return tail;
  }
  tail.A = std::pow(a, tail.gamma);
  tail.shift = b / a;
  for (std::size_t i = first; i < n; ++i) {
    const double model = tail.eigenvalue(static_cast<double>(i + 1));
    tail.max_rel_residual = std::max(tail.max_rel_residual, std::abs(model - eigenvalues[i]) / eigenvalues[i]);
  }
  tail.valid = tail.max_rel_residual < 1e-2;
  if (!tail.valid) tail.note = "Weyl fit residual too large";
  return tail;
}

cplx tail_sum(const std::function<cplx(double)>& g, std::size_t n, double decay) {
  if (!(decay > 1.0)) throw UsageError("tail_sum needs decay > 1");
  const double K = static_cast<double>(n) + 0.5;
  const double m = 1.0 / (decay - 1.0);
  auto integrand = [&](double t) -> cplx {
    const double k = K * std::pow(t, -m);
    if (!std::isfinite(k) || k > 1e150) return 0.0;
    return m * k / t * g(k);
  };
  const cplx integral = integrate_gk(integrand, 0.0, 1.0, 1e-15, 1e-11, 2000).value;
  auto first_difference = [&](double h) { return (g(K + h) - g(K - h)) / (2.0 * h); };
  const cplx slope = (4.0 * first_difference(5e-3 * K) - first_difference(1e-2 * K)) / 3.0;
  auto third_difference = [&](double H) {
    return (g(K + 2.0 * H) - 2.0 * g(K + H) + 2.0 * g(K - H) - g(K - 2.0 * H)) / (2.0 * H * H * H);
  };
  const cplx third = (4.0 * third_difference(0.05 * K) - third_difference(0.1 * K)) / 3.0;
  return integral + slope / 24.0 - 7.0 * third / 5760.0;
}

// ---------------------------------------------------------------------------

TruncatedOracle truncated_oracle_eigenvalues(const Potential& pot, const BoundaryCondition& bc, double L,
                                             std::size_t count) {
  namespace odeint = boost::numeric::odeint;
  if (!(L > 0.0)) throw UsageError("truncation length must be positive");
  if (count == 0) throw UsageError("eigenvalue count must be at least 1");
  using State = std::array<double, 1>;
  const double theta0 = bc.alpha() == 0.0 ? 0.0 : kPi - bc.alpha();

  auto solve = [&](double length) {
    auto end_angle = [&](double lambda) {
      State th{theta0};
      auto rhs = [&](const State& y, State& dy, double x) {
        const double s = std::sin(y[0]);
        const double c = std::cos(y[0]);
        dy[0] = c * c + (lambda - pot.q(x)) * s * s;
      };
      auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(1e-13, 1e-13);
      odeint::integrate_adaptive(stepper, rhs, th, 0.0, length, 1e-3);
      return th[0];
    };
    std::vector<double> out;
    double lo = spectral_floor(pot, bc);
    while (end_angle(lo) > kPi) lo -= 2.0 * std::abs(lo) + 1.0;
    for (std::size_t k = 1; k <= count; ++k) {
      const double target = static_cast<double>(k) * kPi;
      auto f = [&](double l) { return end_angle(l) - target; };
      double a = lo;
      double fa = f(a);
      double step = 1.0;
      double b = a + step;
      double fb = f(b);
      while (fb <= 0.0) {
        a = b;
        fa = fb;
        step *= 2.0;
        b = a + step;
        fb = f(b);
      }
      double root = b;
      if (fa != 0.0) {
        auto stop = [](double x, double y) { return std::abs(x - y) <= 1e-14 * std::max(1.0, std::abs(x)); };
        std::uintmax_t iters = 200;
        const auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, stop, iters);
        root = 0.5 * (r.first + r.second);
      } else {
        root = a;
      }
      out.push_back(root);
      lo = root;
    }
    return out;
  };

  TruncatedOracle res;
  res.L = L;
  res.eigenvalues = solve(L);
  res.eigenvalues_2L = solve(2.0 * L);
  std::ostringstream err;
  for (std::size_t k = 0; k < count; ++k) {
    const double shift = res.eigenvalues[k] - res.eigenvalues_2L[k];
    res.max_shift = std::max(res.max_shift, std::abs(shift));
    if (shift < -1e-9 * std::max(1.0, std::abs(res.eigenvalues[k]))) {
      res.ok = false;
      err << "eigenvalue " << k + 1 << " increased when L was doubled; ";
    }
  }
  if (pot.q(L) < res.eigenvalues.back()) {
    res.ok = false;
    err << "L lies inside the classically allowed region of the highest eigenvalue; ";
  }
  res.error = err.str();
  return res;
}

// ---------------------------------------------------------------------------

cplx weyl_m(const Potential& pot, const BoundaryCondition& bc, cplx z, const IntegratorOptions& opts) {
  JostOptions jo;
  jo.normalization = Normalization::Cap;
  const ScaledState s = jost_solution(pot, z, opts, jo).at_zero;
  const cplx den = bc.sin() * s.du + bc.cos() * s.u;
  if (std::abs(den) < 10.0 * opts.rel_tol * s.mantissa_max()) {
    throw PoleProximityError("weyl_m: z is numerically an eigenvalue", z.real());
  }
  return (bc.cos() * s.du - bc.sin() * s.u) / den;
}

ScaledState weyl_solution(const Potential& pot, const BoundaryCondition& bc, cplx z, double x,
                          const IntegratorOptions& opts) {
  if (!(x >= 0.0)) throw UsageError("weyl_solution needs x >= 0");
  const double X = std::max(default_x_cap(pot, z), x + 10.0);
  const ScaledState seed = wkb_seed(pot, z, X, {Normalization::Cap, -1});
  const ScaledState at_x = integrate(pot, z, seed, x, opts);
  const ScaledState at_0 = x == 0.0 ? at_x : integrate(pot, z, at_x, 0.0, opts);
  const cplx den = bc.sin() * at_0.du + bc.cos() * at_0.u;
  if (std::abs(den) < 10.0 * opts.rel_tol * at_0.mantissa_max()) {
    throw PoleProximityError("weyl_solution: z is numerically an eigenvalue", z.real());
  }
  ScaledState psi = at_x;
  psi.u = at_x.u / den;
  psi.du = at_x.du / den;
  psi.log_scale = at_x.log_scale - at_0.log_scale;
  return psi;
}

cplx green_function(const Potential& pot, const BoundaryCondition& bc, cplx z, double x, double xp,
                    const IntegratorOptions& opts) {
  if (!(x >= 0.0) || !(xp >= 0.0)) throw UsageError("green_function needs x, x' >= 0");
  const double lo = std::min(x, xp);
  const double hi = std::max(x, xp);
  const ScaledState phi = regular_solution(pot, bc, z, lo, opts, RegularKind::Phi);
  const ScaledState psi = weyl_solution(pot, bc, z, hi, opts);
  return phi.u * psi.u * std::exp(phi.log_scale + psi.log_scale);
}

}  // namespace specdet
