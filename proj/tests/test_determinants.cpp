#include <gtest/gtest.h>

#include <cmath>

#include "specdet/airy.hpp"
#include "specdet/determinants.hpp"
#include "specdet/errors.hpp"

using namespace specdet;

namespace {

const BoundaryCondition kDirichlet(0.0);
const BoundaryCondition kNeumann(kPi / 2);

}  // namespace

TEST(CorrectionIntegral, LinearClosedForm) {
  const cplx I = correction_integral(Potential::linear(), -3.0, -1.0, 1.0);
  EXPECT_NEAR(I.real(), -1.17157287525380990240, 1e-12);
  EXPECT_NEAR(I.imag(), 0.0, 1e-15);
}

TEST(CorrectionIntegral, Quadratic) {
  const cplx I = correction_integral(Potential::quadratic(), -1.0, 0.0, 1.0);
  EXPECT_NEAR(I.real(), -0.188226406459597715815, 1e-12);
}

TEST(CorrectionIntegral, ComplexAgainstAiry) {
  const cplx z(0.5, 2.0), z0(-0.3, -0.4);
  const cplx I = correction_integral(Potential::linear(), z, z0, 1.5);
  const cplx expected = airy_closed_forms(z, z0, 1.5, 1.5).correction_integral;
  EXPECT_LT(std::abs(I - expected), 1e-12);
}

TEST(CorrectionIntegral, RejectsRealZOnTheSpectrumSide) {
  EXPECT_THROW(correction_integral(Potential::linear(), 2.0, 0.0, 1.0), BranchError);
}

TEST(TraceClosed, LinearDirichletReference) {
  const TraceClosed t = trace_closed(Potential::linear(), kDirichlet, -1.0, 0.0, 1.0);
  EXPECT_NEAR(t.value.real(), -0.447310834196474041671, 1e-11);
  EXPECT_LT(std::abs(t.boundary_z0 - t.boundary_z + 0.5 * t.correction - t.value), 1e-15);
}

TEST(TraceClosed, LogDerivativeReference) {
  const cplx d = characteristic_log_derivative(Potential::linear(), kDirichlet, -1.0, 1.0);
  EXPECT_NEAR(d.real(), -0.237891595229394025712, 1e-10);
}

TEST(TraceClosed, VanishesAtZEqualsZ0) {
  const cplx z(0.3, 1.2);
  EXPECT_EQ(trace_closed(Potential::quadratic(), kNeumann, z, z, 1.0).value, cplx(0.0));
}

TEST(TraceClosed, IndependentOfX0) {
  const Potential pot = Potential::power_law(1.0, 1.5);
  const cplx z(-0.5, 0.7), z0(-1.0, 0.0);
  const cplx base = trace_closed(pot, kNeumann, z, z0, 1.0).value;
  for (double x0 : {2.0, 5.0}) {
    const cplx t = trace_closed(pot.with_x0(x0), kNeumann, z, z0, x0).value;
    EXPECT_LT(std::abs(t - base), 1e-9 * std::abs(base)) << x0;
  }
}

TEST(TraceClosed, ConjugationSymmetry) {
  const Potential pot = Potential::quadratic();
  const BoundaryCondition bc(0.9);
  const cplx z(-0.5, 0.7), z0(-1.0, 0.2);
  const cplx a = trace_closed(pot, bc, z, z0, 1.0).value;
  const cplx b = trace_closed(pot, bc, std::conj(z), std::conj(z0), 1.0).value;
  EXPECT_LT(std::abs(b - std::conj(a)), 1e-11);
}

TEST(TraceClosed, NegativeBelowSpectrum) {
  // For real z < z0 below the spectrum every term 1/(l - z) - 1/(l - z0) is negative.
  const Potential pot = Potential::linear();
  EXPECT_LT(trace_closed(pot, kDirichlet, -3.0, -1.0, 1.0).value.real(), 0.0);
  EXPECT_GT(trace_closed(pot, kDirichlet, 0.5, -1.0, 1.0).value.real(), 0.0);
}

TEST(TraceClosed, RejectsNonTraceClass) {
  EXPECT_THROW(trace_closed(Potential::power_law(1.0, 0.5), kDirichlet, -1.0, 0.0, 1.0), UsageError);
}

TEST(TraceSpectral, QuadraticAgainstClosedForm) {
  const Potential pot = Potential::quadratic();
  const Spectrum s = find_eigenvalues(pot, kDirichlet, 200);
  const SpectralSum sum = trace_spectral(s, -1.0, 0.0);
  const cplx closed = trace_closed(pot, kDirichlet, -1.0, 0.0, 1.0).value;
  EXPECT_NEAR(closed.real(), -0.127161303721, 1e-11);
  EXPECT_TRUE(sum.tail_applied);
  EXPECT_LT(std::abs(sum.value - closed), 1e-8);
}

TEST(TraceGreen, LinearAgainstClosedForm) {
  const Potential pot = Potential::linear();
  const cplx z(-1.0, 0.5), z0(0.0, 0.0);
  const GreenTrace g = trace_green_diag(pot, kDirichlet, z, z0);
  const cplx closed = trace_closed(pot, kDirichlet, z, z0, 1.0).value;
  EXPECT_LT(std::abs(g.value - closed), 1e-8);
  EXPECT_LT(std::abs(g.window + g.tail - g.value), 1e-15);
}

TEST(TraceGreen, RobinPowerLaw) {
  const Potential pot = Potential::power_law(1.0, 1.5);
  const BoundaryCondition bc(2.0);
  const cplx z(-2.0, 0.0), z0(-0.5, 1.0);
  const GreenTrace g = trace_green_diag(pot, bc, z, z0);
  const cplx closed = trace_closed(pot, bc, z, z0, 1.0).value;
  EXPECT_LT(std::abs(g.value - closed), 1e-8);
}

TEST(GreenDiagonal, MatchesPointwiseGreenFunction) {
  const Potential pot = Potential::linear();
  const cplx z(0.2, 0.6);
  const std::vector<double> xs{0.0, 0.5, 1.0, 2.5, 4.0};
  const std::vector<cplx> g = green_diagonal(pot, kNeumann, z, xs);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const cplx direct = green_function(pot, kNeumann, z, xs[i], xs[i], {1e-12, 1e-14});
    EXPECT_LT(std::abs(g[i] - direct), 1e-9 * std::abs(direct)) << xs[i];
  }
}

TEST(Det2Closed, LinearDirichletReference) {
  const Det2Closed d = det2_closed(Potential::linear(), kDirichlet, -1.0, 0.0, 1.0);
  EXPECT_NEAR(d.value.real(), 0.789980359092212033630, 1e-11);
  EXPECT_LT(std::abs(d.log_boundary_ratio + d.log_exp_factor + d.log_correction - d.log), 1e-15);
  EXPECT_FALSE(d.overflow);
}

TEST(Det2Closed, OneAtZEqualsZ0) {
  const cplx z(1.0, -0.4);
  const Det2Closed d = det2_closed(Potential::quadratic(), kNeumann, z, z, 1.0);
  EXPECT_LT(std::abs(d.value - 1.0), 1e-15);
}

TEST(Det2Closed, IndependentOfX0) {
  const Potential pot = Potential::linear();
  const cplx z(-2.0, 0.5), z0(0.0, 0.0);
  const cplx base = det2_closed(pot, kDirichlet, z, z0, 1.0).log;
  for (double x0 : {2.0, 5.0}) {
    const cplx l = det2_closed(pot.with_x0(x0), kDirichlet, z, z0, x0).log;
    EXPECT_LT(std::abs(l - base), 1e-9) << x0;
  }
}

TEST(Det2Closed, AgainstAiryClosedForm) {
  for (cplx z : {cplx(-1.5, 0.0), cplx(0.5, 0.5), cplx(3.0, -2.0)}) {
    const cplx numeric = det2_closed(Potential::linear(), kDirichlet, z, -0.5, 1.0).value;
    const cplx exact = airy_closed_forms(z, -0.5, 1.0, 1.0).det2;
    EXPECT_LT(std::abs(numeric - exact), 1e-9 * std::abs(exact)) << z;
  }
}

TEST(Det2Closed, WarnsWhenSegmentCrossesSpectrum) {
  const Det2Closed d = det2_closed(Potential::linear(), kDirichlet, cplx(3.0, 0.0), cplx(2.0, 0.0), 4.0);
  EXPECT_FALSE(d.warnings.empty());
}

TEST(Det2Closed, ConjugationSymmetry) {
  const Potential pot = Potential::power_law(2.0, 1.2);
  const BoundaryCondition bc(1.3);
  const cplx z(0.5, 1.5), z0(-1.0, 0.0);
  const cplx a = det2_closed(pot, bc, z, z0, 1.0).value;
  const cplx b = det2_closed(pot, bc, std::conj(z), z0, 1.0).value;
  EXPECT_LT(std::abs(b - std::conj(a)), 1e-10 * std::abs(a));
}

TEST(Det2Spectral, LinearAgainstClosedForm) {
  const Potential pot = Potential::linear();
  const Spectrum s = find_eigenvalues(pot, kDirichlet, 200);
  const Det2Spectral sp = det2_spectral(s, -1.0, 0.0);
  EXPECT_TRUE(sp.tail_applied);
  EXPECT_LT(std::abs(sp.value - 0.789980359092212033630), 1e-7);
}

TEST(Identity, TraceIsMinusLogDerivative) {
  const Potential pot = Potential::quadratic();
  const BoundaryCondition bc(kPi / 4);
  const IdentityReport r = verify_trace_identity(pot, bc, {cplx(-3.0, 0.0), cplx(-1.0, 1.0), cplx(2.0, -1.0)},
                                                 cplx(-2.0, 0.0), 1.0);
  EXPECT_EQ(r.points.size(), 3u);
  EXPECT_LT(r.max_residual, 1e-7);
}

TEST(TwoConditions, ClosedFormAtEqualArguments) {
  const TwoConditionTrace t = trace_two_bc(Potential::linear(), kDirichlet, kNeumann, -1.0, -1.0, 1.0);
  EXPECT_NEAR(t.value.real(), 0.326214574838, 1e-10);
  EXPECT_EQ(t.correction, cplx(0.0));
}

TEST(TwoConditions, ReducesToOneConditionForEqualAngles) {
  const Potential pot = Potential::linear();
  const cplx z(-0.5, 0.5), z0(-1.0, 0.0);
  const cplx two = trace_two_bc(pot, kNeumann, kNeumann, z, z0, 1.0).value;
  const cplx one = trace_closed(pot, kNeumann, z, z0, 1.0).value;
  EXPECT_LT(std::abs(two - one), 1e-13);
}

TEST(TwoConditions, SpectralSum) {
  const Potential pot = Potential::linear();
  const Spectrum d = find_eigenvalues(pot, kDirichlet, 150);
  const Spectrum n = find_eigenvalues(pot, kNeumann, 150);
  const SpectralSum s = trace_spectral_two_bc(d, n, -1.0, -1.0);
  EXPECT_LT(std::abs(s.value - 0.326214574838), 1e-4);
}

TEST(ZeroOrder, SimpleZeroAtFirstEigenvalue) {
  const ZeroOrderFit fit = fit_zero_order(Potential::linear(), kDirichlet, 2.33810741045976703849, 0.0, 5.0);
  EXPECT_NEAR(fit.order, 1.0, 0.02);
  EXPECT_EQ(fit.offsets.size(), fit.log_moduli.size());
}

TEST(Reports, TraceBreakdownSumsToClosedForm) {
  ReportOptions opts;
  opts.eigenvalues = 50;
  const DetTraceReport r = trace_report(Potential::linear(), kDirichlet, cplx(-1.0, 0.3), 0.0, 1.0, opts);
  cplx sum = 0.0;
  for (const NamedValue& t : r.terms) sum += t.value;
  EXPECT_LT(std::abs(sum - r.closed_form), 1e-14);
  ASSERT_TRUE(r.spectral && r.green_diag && r.correction);
  EXPECT_EQ(r.n_eigenvalues_used, 50u);
  EXPECT_EQ(r.residuals.size(), 3u);
}

TEST(Reports, Det2BreakdownSumsToLog) {
  const DetTraceReport r = det2_report(Potential::quadratic(), kNeumann, cplx(-1.0, 0.3), 0.0, 1.0);
  ASSERT_TRUE(r.log_closed_form);
  cplx sum = 0.0;
  for (const NamedValue& t : r.terms) sum += t.value;
  EXPECT_LT(std::abs(sum - *r.log_closed_form), 1e-14);
  EXPECT_FALSE(r.spectral.has_value());
}
