#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "specdet/airy.hpp"
#include "specdet/errors.hpp"
#include "specdet/ode_engine.hpp"
#include "specdet/spectrum.hpp"

using namespace specdet;

namespace {

const IntegratorOptions kTight{1e-12, 1e-14};

cplx value(const ScaledState& s) { return s.value().value(); }
cplx slope(const ScaledState& s) { return s.derivative().value(); }

}  // namespace

TEST(Jost, LinearAtZeroMatchesReference) {
  const JostResult r = jost_solution(Potential::linear(), 0.0, kTight);
  EXPECT_NEAR(value(r.at_zero).real(), 1.73333401862264029325, 1e-10);
  EXPECT_NEAR(value(r.at_zero).imag(), 0.0, 1e-14);
  EXPECT_EQ(r.at_zero.x, 0.0);
}

TEST(Jost, ComplexZAgainstAiryClosedForm) {
  for (cplx z : {cplx(-1.0, 0.5), cplx(3.0, 2.0), cplx(-6.0, -1.0)}) {
    const JostResult r = jost_solution(Potential::linear(), z, kTight);
    const AiryClosedForms cf = airy_closed_forms(z, 0.0, 0.0, 1.0);
    EXPECT_LT(std::abs(value(r.at_zero) / cf.f1 - 1.0), 1e-9) << z;
    EXPECT_LT(std::abs(slope(r.at_zero) / cf.f1_prime - 1.0), 1e-9) << z;
  }
}

TEST(Jost, ConjugationSymmetry) {
  const cplx z(1.5, 0.75);
  const Potential pot = Potential::quadratic();
  const cplx a = value(jost_solution(pot, z, kTight).at_zero);
  const cplx b = value(jost_solution(pot, std::conj(z), kTight).at_zero);
  EXPECT_LT(std::abs(b - std::conj(a)), 1e-10 * std::abs(a));
}

TEST(Jost, ZDerivativeAgainstReference) {
  const JostAugmentedResult r = jost_solution_with_zderiv(Potential::linear(), -1.0, kTight);
  const cplx dlog = r.at_zero.zder_u / r.at_zero.base.u;
  EXPECT_NEAR(dlog.real(), -0.237891595229394025712, 1e-9);
}

TEST(Jost, ZDerivativeAgainstDifferenceQuotient) {
  const Potential pot = Potential::power_law(1.0, 1.5);
  const cplx z(0.4, 0.3);
  const double h = 1e-4;
  const JostAugmentedResult r = jost_solution_with_zderiv(pot, z, kTight);
  const ScaledValue fp = jost_solution(pot, z + h, kTight).at_zero.value();
  const ScaledValue fm = jost_solution(pot, z - h, kTight).at_zero.value();
  const ScaledValue f0 = r.at_zero.base.value();
  const cplx fd = (ratio(fp, f0) - ratio(fm, f0)) / (2.0 * h);
  EXPECT_LT(std::abs(fd - r.at_zero.zder_u / r.at_zero.base.u), 1e-7);
}

TEST(Jost, NormalizationsShareDirection) {
  const Potential pot = Potential::linear();
  JostOptions cap;
  cap.normalization = Normalization::Cap;
  const ScaledState a = jost_solution(pot, 0.5, kTight).at_zero;
  const ScaledState b = jost_solution(pot, 0.5, kTight, cap).at_zero;
  EXPECT_LT(std::abs(a.du / a.u - b.du / b.u), 1e-9);
}

TEST(Jost, CapNormalizationAboveQAtX0) {
  // Real z above q(x0): only the seed-anchored normalization is defined.
  const Potential pot = Potential::linear();
  JostOptions cap;
  cap.normalization = Normalization::Cap;
  const ScaledState s = jost_solution(pot, 4.0, kTight, cap).at_zero;
  const AiryValues a = airy_eval(-4.0);
  EXPECT_LT(std::abs(s.du / s.u - a.ai_prime / a.ai), 1e-9);
  EXPECT_THROW(jost_solution(pot, 4.0, kTight), BranchError);
}

TEST(Jost, TrajectoryRunsFromCapToZero) {
  JostOptions opts;
  opts.record_trajectory = true;
  const JostResult r = jost_solution(Potential::linear(), cplx(-1.0, 0.5), {}, opts);
  ASSERT_GT(r.trajectory.size(), 10u);
  EXPECT_DOUBLE_EQ(r.trajectory.front().x, r.x_cap);
  EXPECT_DOUBLE_EQ(r.trajectory.back().x, 0.0);
  for (std::size_t i = 1; i < r.trajectory.size(); ++i) EXPECT_LT(r.trajectory[i].x, r.trajectory[i - 1].x);

  std::ostringstream csv;
  write_trajectory_csv(csv, r.trajectory);
  const std::string text = csv.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "x,re_u,im_u,re_du,im_du,log_scale");
}

TEST(RegularSolution, DirichletPhiAtOne) {
  const ScaledState phi = regular_solution(Potential::linear(), BoundaryCondition(0.0), 0.0, 1.0, kTight);
  EXPECT_NEAR(value(phi).real(), 1.08533964808298234031, 1e-11);
}

TEST(RegularSolution, WronskianOfPhiAndThetaIsOne) {
  const Potential pot = Potential::quadratic();
  const BoundaryCondition bc(0.7);
  const cplx z(2.0, -1.0);
  const ScaledState phi = regular_solution(pot, bc, z, 3.0, kTight, RegularKind::Phi);
  const ScaledState theta = regular_solution(pot, bc, z, 3.0, kTight, RegularKind::Theta);
  EXPECT_LT(std::abs(wronskian(theta, phi).value() - 1.0), 1e-10);
}

TEST(Integrator, ReportsStepExhaustion) {
  IntegratorOptions opts = kTight;
  opts.max_steps = 5;
  ScaledState start;
  start.u = 1.0;
  EXPECT_THROW(integrate(Potential::linear(), 0.0, start, 30.0, opts), NumericalError);
}

TEST(Seed, DirectionMatchesAiryFarOut) {
  const double X = 20.0;
  const cplx z(-1.0, 0.3);
  const ScaledState s = wkb_seed(Potential::linear(), z, X);
  const AiryValues a = airy_eval(X - z);
  const cplx expected = -a.ai_prime / a.ai;  // d/dx Ai(x - z) = Ai'(x - z)
  EXPECT_LT(std::abs(s.du / s.u + expected) / std::abs(expected), 1e-12);
}

TEST(Seed, RejectsClassicallyAllowedPoint) {
  EXPECT_THROW(wkb_seed(Potential::linear(), 5.0, 3.0), NumericalError);
}

TEST(Seed, CapClearsTurningPoint) {
  const Potential pot = Potential::quadratic({1.5, 1.0, 0.25});
  for (double z : {-3.0, 0.0, 10.0, 200.0}) {
    const double X = default_x_cap(pot, z);
    EXPECT_GE(X, 2.0 * pot.x0());
    EXPECT_GT(pot.q(X), z);
  }
}

TEST(Seed, GreenDiagonalDifferenceFarOut) {
  const Potential pot = Potential::linear();
  const BoundaryCondition bc(0.0);
  const double x = 9.0;
  const cplx z(-1.0, 0.5), z0(0.0, 0.0);
  const cplx direct = green_function(pot, bc, z, x, x, kTight) - green_function(pot, bc, z0, x, x, kTight);
  const cplx asym = wkb_green_diagonal_difference(pot, z, z0, x);
  EXPECT_LT(std::abs(asym - direct), 1e-9 * std::abs(direct));
}
