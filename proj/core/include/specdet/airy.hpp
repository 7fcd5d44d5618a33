#pragma once

#include <vector>

#include "specdet/numeric.hpp"

namespace specdet {

struct AiryValues {
  cplx ai, ai_prime, bi, bi_prime;
};

/// Ai, Ai', Bi, Bi' at complex t with |t| <= 1000.
///
/// Maclaurin series for |t| <= 3, asymptotic expansions for |t| >= 15 in the sectors where a
/// single exponential dominates (and on the negative real axis), and Taylor-series
/// continuation of the Airy equation elsewhere. Continuation always runs in the direction in
/// which the wanted solution does not decay, so relative accuracy stays near 1e-14.
/// Values overflow to inf for Re((2/3) t^(3/2)) beyond ~700.
AiryValues airy_eval(cplx t);

/// Closed forms for q(x) = x with the Dirichlet condition at 0.
struct AiryClosedForms {
  cplx f1, f1_prime;              // decaying solution normalized at x0
  cplx f2, f2_prime;              // growing companion
  cplx wronskian_f1_f2;           // = 1
  cplx phi0, phi0_prime;          // regular solution, phi0(0) = 0, phi0'(0) = 1
  cplx psi0, psi0_prime;          // Weyl solution, psi0(0) = 1
  cplx wronskian_phi_psidot;      // W(phi0, d/dz psi0)(x)
  /// The same without pi Bi(-z)/Ai(-z) [t Ai(t)^2 - Ai'(t)^2], t = x - z: exact only as x -> inf.
  cplx wronskian_phi_psidot_far;
  cplx correction_integral;       // I(z, z0, x0)
  cplx trace;                     // tr of the resolvent difference
  cplx det2;                      // full closed form with the exponential factor
  cplx det2_truncated;            // the same without the exponential factor
  cplx log_det2;
};

/// Throws PoleProximityError when Ai(-z) or Ai(-z0) vanishes numerically.
AiryClosedForms airy_closed_forms(cplx z, cplx z0, double x, double x0);

/// Residuals of tr + d/dz log det2 on a z grid, once with the full closed form and once with
/// the exponential factor deleted. The truncated residual should be the constant -Ai'(-z0)/Ai(-z0).
struct FactorPoint {
  cplx z;
  cplx trace;
  cplx dlog_full;
  cplx dlog_truncated;
  cplx residual_full;
  cplx residual_truncated;
  double factor_modulus;  // |det2 / det2_truncated|, never zero
};

struct FactorReport {
  cplx z0;
  cplx expected_offset;               // -Ai'(-z0)/Ai(-z0)
  std::vector<FactorPoint> points;
  double max_residual_full = 0.0;
  double max_offset_deviation = 0.0;  // max |residual_truncated - expected_offset|
  double offset_spread = 0.0;         // max - min of residual_truncated over the grid
};

FactorReport exponential_factor_experiment(const std::vector<cplx>& z_grid, cplx z0);

}  // namespace specdet
