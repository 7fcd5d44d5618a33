#pragma once

#include <cmath>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "specdet/boundary_condition.hpp"
#include "specdet/numeric.hpp"
#include "specdet/potential.hpp"

namespace specdet {

/// Solution sample (u, u') = (mantissa) * exp(log_scale) at position x.
struct ScaledState {
  cplx u{0.0, 0.0};
  cplx du{0.0, 0.0};
  double log_scale = 0.0;
  double x = 0.0;

  ScaledValue value() const { return {u, log_scale}; }
  ScaledValue derivative() const { return {du, log_scale}; }
  double mantissa_max() const { return std::max(std::abs(u), std::abs(du)); }
};

/// A solution together with its z-derivative; all four mantissas share base.log_scale.
struct AugmentedState {
  ScaledState base;
  cplx zder_u{0.0, 0.0};
  cplx zder_du{0.0, 0.0};
};

struct IntegratorOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  long max_steps = 2'000'000;
  double renorm_threshold = std::exp(10.0);
};

/// Called after every accepted step with the current (not canonicalized) state.
using StepObserver = std::function<void(const ScaledState&)>;

/// Solves -u'' + q u = z u from `from.x` to x_to with an adaptive Dormand-Prince 5(4) pair.
/// The returned state is canonical: max(|u|, |du|) in [1, e).
/// Throws NumericalError (with the last good x) on step exhaustion, step underflow or non-finite q.
ScaledState integrate(const Potential& pot, cplx z, const ScaledState& from, double x_to,
                      const IntegratorOptions& opts = {}, const StepObserver& observer = {});

/// Same for the pair (u, d/dz u), where d/dz u obeys -v'' + q v = z v + u.
AugmentedState integrate_augmented(const Potential& pot, cplx z, const AugmentedState& from, double x_to,
                                   const IntegratorOptions& opts = {});

enum class RegularKind { Phi, Theta };

/// phi_alpha starts from (-sin a, cos a) at 0, theta_alpha from (cos a, sin a).
ScaledState regular_solution(const Potential& pot, const BoundaryCondition& bc, cplx z, double x_to,
                             const IntegratorOptions& opts = {}, RegularKind which = RegularKind::Phi);

/// Where the decaying solution takes its normalization.
///  Reference: f(x) ~ 2^(-1/2) (q - z)^(-1/4) exp(-int_{x0}^x sqrt(q - z)), the x0-anchored solution.
///  Cap: the same with the phase anchored at the seed point X. Real and positive at X for real z,
///       and free of the square-root branch cut; use it wherever the normalization cancels.
enum class Normalization { Reference, Cap };

struct SeedOptions {
  Normalization normalization = Normalization::Reference;
  /// Highest Riccati correction order; negative selects it automatically (optimal truncation).
  /// 1 gives the plain Liouville-Green form.
  int max_order = -1;
  /// Only the direction of (f, f') at X is wanted; skips the integrals that fix the overall scale.
  bool direction_only = false;
};

/// Decaying solution and its derivative at X from the Liouville-Green series.
/// Throws NumericalError when q(X) - Re z <= 0, BranchError when the reference phase crosses the cut.
ScaledState wkb_seed(const Potential& pot, cplx z, double X, const SeedOptions& seed = {});
AugmentedState wkb_seed_zderiv(const Potential& pot, cplx z, double X, const SeedOptions& seed = {});

/// G(z, x, x) - G(z0, x, x) for the diagonal of the Green's function far out, where
/// G(z, x, x) = -1 / (2 S) and S is the even part of the decaying Liouville-Green series.
/// Independent of the boundary condition up to exponentially small terms.
cplx wkb_green_diagonal_difference(const Potential& pot, cplx z, cplx z0, double x);

/// Starting seed point for z: clears the turning point of Re z by a distance carrying
/// a WKB phase of at least 40, and lies at or beyond 2 x0.
double default_x_cap(const Potential& pot, cplx z);

struct JostOptions {
  Normalization normalization = Normalization::Reference;
  /// Fixed seed point; when empty the seed point is chosen and doubled until stable.
  std::optional<double> x_cap;
  bool record_trajectory = false;
  int max_order = -1;
};

struct JostResult {
  ScaledState at_zero;
  std::vector<ScaledState> trajectory;  // from X_cap down to 0, when recorded
  double x_cap = 0.0;
  int doublings = 0;
  double stability = 0.0;  // relative change of the state at 0 over the last doubling
};

struct JostAugmentedResult {
  AugmentedState at_zero;
  double x_cap = 0.0;
  int doublings = 0;
  double stability = 0.0;
};

/// Decaying solution at x = 0 by backward integration from the seed point.
/// With automatic seed placement the clearance beyond the turning point is doubled until the
/// state at 0 changes by less than 100 * rel_tol; X_cap is capped at 1e6.
JostResult jost_solution(const Potential& pot, cplx z, const IntegratorOptions& opts = {},
                         const JostOptions& jost = {});

JostAugmentedResult jost_solution_with_zderiv(const Potential& pot, cplx z, const IntegratorOptions& opts = {},
                                              const JostOptions& jost = {});

/// W(a, b) = a b' - a' b with the scales combined.
ScaledValue wronskian(const ScaledState& a, const ScaledState& b);

/// Writes `x,re_u,im_u,re_du,im_du,log_scale` rows.
void write_trajectory_csv(std::ostream& out, const std::vector<ScaledState>& trajectory);

}  // namespace specdet
