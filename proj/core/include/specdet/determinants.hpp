#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "specdet/boundary_condition.hpp"
#include "specdet/numeric.hpp"
#include "specdet/ode_engine.hpp"
#include "specdet/potential.hpp"
#include "specdet/spectrum.hpp"

namespace specdet {

struct DetOptions {
  IntegratorOptions integrator{1e-12, 1e-14};
  double quad_abs_tol = 1e-13;
  double quad_rel_tol = 1e-12;
  double segment_tol = 1e-10;  // z-segment Gauss-Legendre doubling
};

/// I(z, z0, x0) = int_{x0}^inf ([q - z]^(-1/2) - [q - z0]^(-1/2)) dx, principal roots.
/// Throws BranchError when z or z0 is real and q(x) <= it somewhere on [x0, inf).
cplx correction_integral(const Potential& pot, cplx z, cplx z0, double x0, const DetOptions& opts = {});

/// d/dz log D(z) with D = sin(a) f' + cos(a) f at 0, f normalized at x0.
cplx characteristic_log_derivative(const Potential& pot, const BoundaryCondition& bc, cplx z, double x0,
                                   const DetOptions& opts = {});

struct TraceClosed {
  cplx value;
  cplx boundary_z0;  // [D'/D](z0)
  cplx boundary_z;   // [D'/D](z)
  cplx correction;   // I(z, z0, x0)
};

/// tr[(H - z)^-1 - (H - z0)^-1] = [D'/D](z0) - [D'/D](z) + I/2.
TraceClosed trace_closed(const Potential& pot, const BoundaryCondition& bc, cplx z, cplx z0, double x0,
                         const DetOptions& opts = {});

struct SpectralSum {
  cplx value;          // partial + tail
  cplx partial;
  cplx tail;
  std::size_t terms = 0;
  bool tail_applied = false;
  std::string note;
};

/// sum_k [(l_k - z)^-1 - (l_k - z0)^-1] with the Weyl-tail remainder.
SpectralSum trace_spectral(const Spectrum& spec, cplx z, cplx z0);

/// G(z, x, x) at ascending points x.
std::vector<cplx> green_diagonal(const Potential& pot, const BoundaryCondition& bc, cplx z,
                                 const std::vector<double>& xs, const IntegratorOptions& opts = {1e-12, 1e-14});

struct GreenTrace {
  cplx value;
  cplx window;      // int_0^R
  cplx tail;        // int_R^inf from the diagonal asymptotics
  double R = 0.0;
  int panels = 0;
  double refinement_change = 0.0;
};

/// Integral of G(z, x, x) - G(z0, x, x) over (0, inf): Gauss-Legendre panels on [0, R], refined
/// until stable, and the asymptotic diagonal beyond R.
GreenTrace trace_green_diag(const Potential& pot, const BoundaryCondition& bc, cplx z, cplx z0,
                            const DetOptions& opts = {});

struct Det2Closed {
  cplx value;
  cplx log;
  cplx log_boundary_ratio;  // log D(z)/D(z0)
  cplx log_exp_factor;      // -(z - z0) [D'/D](z0)
  cplx log_correction;      // -1/2 int_{z0}^z I(zeta, z0, x0) dzeta
  int segment_nodes = 0;
  bool overflow = false;
  std::vector<std::string> warnings;
};

/// det2 from the closed form; every factor carried as a logarithm.
Det2Closed det2_closed(const Potential& pot, const BoundaryCondition& bc, cplx z, cplx z0, double x0,
                       const DetOptions& opts = {});

struct Det2Spectral {
  cplx value;
  cplx log;
  cplx log_partial;
  cplx log_tail;
  std::size_t terms = 0;
  bool tail_applied = false;
  std::string note;
};

/// prod_k (1 - w_k) exp(w_k), w_k = (z - z0) / (l_k - z0), summed in log form with a Weyl tail.
Det2Spectral det2_spectral(const Spectrum& spec, cplx z, cplx z0);

struct IdentityPoint {
  cplx z;
  cplx trace;
  cplx minus_dlog_det;
  double residual;
};

struct IdentityReport {
  cplx z0;
  double x0 = 0.0;
  std::vector<IdentityPoint> points;
  double max_residual = 0.0;
};

/// Compares trace_closed with -d/dz log det2_closed (5-point stencil plus Richardson) on a grid.
IdentityReport verify_trace_identity(const Potential& pot, const BoundaryCondition& bc, const std::vector<cplx>& z_grid,
                                     cplx z0, double x0, const DetOptions& opts = {});

struct TwoConditionTrace {
  cplx value;
  cplx boundary_z0;  // [D'_a1/D_a1](z0)
  cplx boundary_z;   // [D'_a2/D_a2](z)
  cplx correction;   // I(z, z0, x0), zero when z == z0
};

/// tr[(H_a2 - z)^-1 - (H_a1 - z0)^-1].
TwoConditionTrace trace_two_bc(const Potential& pot, const BoundaryCondition& a1, const BoundaryCondition& a2,
                               cplx z, cplx z0, double x0, const DetOptions& opts = {});

/// sum_k [(l_k(a2) - z)^-1 - (l_k(a1) - z0)^-1], paired index by index, with a Weyl tail.
SpectralSum trace_spectral_two_bc(const Spectrum& s1, const Spectrum& s2, cplx z, cplx z0);

struct ZeroOrderFit {
  double order = 0.0;
  std::vector<double> offsets;
  std::vector<double> log_moduli;
};

/// Vanishing order of det2_closed at an eigenvalue from log |det2(lambda - eps)| against log eps.
ZeroOrderFit fit_zero_order(const Potential& pot, const BoundaryCondition& bc, double lambda, cplx z0, double x0,
                            const DetOptions& opts = {});

struct NamedValue {
  std::string name;
  cplx value;
};

struct NamedResidual {
  std::string name;
  double value;
};

/// Everything the CLI reports for one (z, z0) evaluation.
struct DetTraceReport {
  std::string quantity;  // "trace" or "det2"
  cplx z, z0;
  double x0 = 0.0;
  BoundaryCondition alpha;
  std::optional<BoundaryCondition> alpha2;
  cplx closed_form;
  std::optional<cplx> log_closed_form;
  std::optional<cplx> spectral;
  std::optional<cplx> green_diag;
  std::vector<NamedValue> terms;  // sum to closed_form (traces) or log_closed_form (det2)
  std::optional<cplx> correction;  // I(z, z0, x0), traces only
  std::vector<NamedResidual> residuals;
  std::size_t n_eigenvalues_used = 0;
  cplx tail_correction;
  std::vector<std::string> warnings;
};

struct ReportOptions {
  std::size_t eigenvalues = 0;  // 0 skips the spectral route
  bool green = true;            // traces only
  DetOptions det;
  EigenOptions eigen;
};

DetTraceReport trace_report(const Potential& pot, const BoundaryCondition& bc, cplx z, cplx z0, double x0,
                            const ReportOptions& opts = {});
DetTraceReport two_bc_trace_report(const Potential& pot, const BoundaryCondition& a1, const BoundaryCondition& a2,
                                   cplx z, cplx z0, double x0, const ReportOptions& opts = {});
DetTraceReport det2_report(const Potential& pot, const BoundaryCondition& bc, cplx z, cplx z0, double x0,
                           const ReportOptions& opts = {});

}  // namespace specdet
