#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "specdet/boundary_condition.hpp"
#include "specdet/numeric.hpp"
#include "specdet/ode_engine.hpp"
#include "specdet/potential.hpp"

namespace specdet {

/// Continuous eigenvalue model lambda(k) = A (k + shift)^gamma fitted to the upper half of a
/// computed spectrum; used to sum slowly convergent tails.
struct WeylTail {
  bool valid = false;
  double A = 0.0;
  double gamma = 0.0;
  double shift = 0.0;
  double max_rel_residual = 0.0;  // worst relative misfit over the fitted range
  std::string note;

  double eigenvalue(double k) const;
};

struct Spectrum {
  BoundaryCondition bc;
  std::vector<double> eigenvalues;  // strictly increasing
  std::vector<double> residuals;    // |cos a u + sin a u'| / max(|u|, |u'|) at the last polish evaluation
  std::vector<int> multiplicity;    // 1 for every entry
  WeylTail weyl_tail;
};

/// D(z) = sin(a) f'(z, 0) + cos(a) f(z, 0). Reference normalization is the x0-anchored solution;
/// Cap normalization avoids the branch cut for real z above q(x0).
ScaledValue characteristic_function(const Potential& pot, const BoundaryCondition& bc, cplx z,
                                    const IntegratorOptions& opts = {},
                                    Normalization norm = Normalization::Reference);

struct EigenOptions {
  IntegratorOptions polish{1e-12, 1e-14};
  IntegratorOptions scan{1e-8, 1e-10};
  double root_tol = 1e-10;  // |delta lambda| < root_tol * max(1, |lambda|)
  int max_refinements = 60;
};

/// First `count` eigenvalues: a counting scan on the unwrapped angle atan2(f, f') at 0, refined
/// until every cell holds one root, then each root polished on that angle with the seed point held
/// fixed. Brackets are polished in parallel.
Spectrum find_eigenvalues(const Potential& pot, const BoundaryCondition& bc, std::size_t count,
                          const EigenOptions& opts = {});

/// Number of eigenvalues strictly below lambda, with the unwrapped angle at 0.
struct EigenCount {
  long count = 0;
  double angle = 0.0;
};
EigenCount count_eigenvalues_below(const Potential& pot, const BoundaryCondition& bc, double lambda,
                                   const IntegratorOptions& opts = {});

/// Fits the Weyl tail model to an increasing eigenvalue list.
WeylTail fit_weyl_tail(const Potential& pot, const std::vector<double>& eigenvalues);

/// sum_{k > n} g(k) for a smooth g decaying like k^(-decay), decay > 1, by the midpoint
/// Euler-Maclaurin formula on [n + 1/2, inf) with the g' and g''' corrections.
cplx tail_sum(const std::function<cplx(double)>& g, std::size_t n, double decay);

struct TruncatedOracle {
  double L = 0.0;
  std::vector<double> eigenvalues;     // on [0, L], Dirichlet at L
  std::vector<double> eigenvalues_2L;  // on [0, 2L]
  double max_shift = 0.0;              // max |lambda(L) - lambda(2L)|
  bool ok = true;
  std::string error;
};

/// Eigenvalues of the regular problem on [0, L] (condition a at 0, Dirichlet at L) by Pruefer
/// shooting. Repeated on [0, 2L]; non-monotone results or q(L) < lambda_N are reported in `error`.
TruncatedOracle truncated_oracle_eigenvalues(const Potential& pot, const BoundaryCondition& bc, double L,
                                             std::size_t count);

/// m(z) = [cos(a) f' - sin(a) f] / [sin(a) f' + cos(a) f] at 0, so that theta + m phi is in L^2.
/// Throws PoleProximityError when z is numerically an eigenvalue.
cplx weyl_m(const Potential& pot, const BoundaryCondition& bc, cplx z, const IntegratorOptions& opts = {});

/// psi(z, x) = f(z, x) / D(z), the Weyl solution with W(psi, phi) = 1.
ScaledState weyl_solution(const Potential& pot, const BoundaryCondition& bc, cplx z, double x,
                          const IntegratorOptions& opts = {});

/// G(z, x, x') = phi(z, min) psi(z, max).
cplx green_function(const Potential& pot, const BoundaryCondition& bc, cplx z, double x, double xp,
                    const IntegratorOptions& opts = {});

}  // namespace specdet
