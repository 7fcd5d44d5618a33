#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "specdet/boundary_condition.hpp"
#include "specdet/errors.hpp"
#include "specdet/potential.hpp"

using namespace specdet;

TEST(Potential, MonomialValuesAndDerivatives) {
  const Potential lin = Potential::linear();
  EXPECT_DOUBLE_EQ(lin.q(3.5), 3.5);
  EXPECT_DOUBLE_EQ(lin.q_prime(3.5), 1.0);

  const Potential pw = Potential::power_law(2.0, 1.5);
  std::array<double, 4> d{};
  ASSERT_EQ(pw.derivatives(4.0, d), d.size());
  EXPECT_NEAR(d[0], 16.0, 1e-13);
  EXPECT_NEAR(d[1], 6.0, 1e-13);
  EXPECT_NEAR(d[2], 0.75, 1e-13);
  EXPECT_NEAR(d[3], -0.09375, 1e-13);
}

TEST(Potential, TurningPointInvertsQ) {
  const Potential quad = Potential::quadratic();
  EXPECT_NEAR(quad.turning_point(9.0), 3.0, 1e-12);
  EXPECT_EQ(quad.turning_point(-1.0), 0.0);
  const Potential pw = Potential::power_law(0.5, 3.0);
  EXPECT_NEAR(pw.q(pw.turning_point(7.0)), 7.0, 1e-10);
}

TEST(Potential, WeylExponent) {
  EXPECT_NEAR(Potential::linear().weyl_exponent(), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(Potential::quadratic().weyl_exponent(), 1.0, 1e-15);
}

TEST(Potential, CustomFallsBackToDifferencing) {
  auto q = [](double x) { return x * x + std::sin(x); };
  auto dq = [](double x) { return 2.0 * x + std::cos(x); };
  const Potential pot = Potential::custom(q, dq, {});
  std::array<double, 3> d{};
  EXPECT_GE(pot.derivatives(2.0, d), 3u);
  EXPECT_NEAR(d[2], 2.0 - std::sin(2.0), 1e-6);
  EXPECT_NEAR(pot.growth_exponent(), 2.0, 0.05);
}

TEST(Potential, RejectsBadParameters) {
  EXPECT_THROW(Potential::power_law(-1.0, 1.0), UsageError);
  EXPECT_THROW(Potential::power_law(1.0, 0.0), UsageError);
  EXPECT_THROW(Potential::linear({1.0, 0.0, 0.25}), UsageError);
}

TEST(Potential, WithX0KeepsOtherConstants) {
  const Potential pot = Potential::linear({1.0, 0.5, 0.2}).with_x0(4.0);
  EXPECT_EQ(pot.x0(), 4.0);
  EXPECT_EQ(pot.C0(), 0.5);
  EXPECT_EQ(pot.eps0(), 0.2);
}

TEST(BoundaryConditionTest, AngleRange) {
  EXPECT_NO_THROW(BoundaryCondition{0.0});
  EXPECT_NO_THROW(BoundaryCondition{3.14});
  EXPECT_THROW(BoundaryCondition{kPi}, UsageError);
  EXPECT_THROW(BoundaryCondition{3.2}, UsageError);
  EXPECT_THROW(BoundaryCondition{-0.1}, UsageError);
  EXPECT_EQ(BoundaryCondition(0.0).boundary_angle(), 0.0);
  EXPECT_NEAR(BoundaryCondition(kPi / 2).boundary_angle(), kPi / 2, 1e-15);
}

TEST(Hypothesis, LinearAndQuadraticPass) {
  for (const Potential& pot : {Potential::linear(), Potential::quadratic()}) {
    const ValidityReport r = validate_hypothesis(pot);
    EXPECT_TRUE(r.all_passed()) << to_string(pot.kind());
    EXPECT_GE(r.lower_bound.value, pot.C0());
  }
}

TEST(Hypothesis, LinearLowerBoundMinimumAtX0) {
  // x / x^(2/3 + 1/4) increases, so the minimum ratio sits at x0 = 1.
  const ValidityReport r = validate_hypothesis(Potential::linear());
  EXPECT_NEAR(r.lower_bound.value, 1.0, 1e-12);
}

TEST(Hypothesis, SubcriticalGrowthFailsLowerBound) {
  const Potential pot = Potential::power_law(1.0, 0.5, HypothesisConstants{1.0, 1.0, 0.25});
  const ValidityReport r = validate_hypothesis(pot);
  EXPECT_TRUE(r.valid);
  EXPECT_FALSE(r.lower_bound.passed);
  EXPECT_FALSE(r.all_passed());
}

TEST(Hypothesis, NonFiniteEvaluatorIsReported) {
  auto q = [](double x) { return x > 50.0 ? std::nan("") : x; };
  auto dq = [](double) { return 1.0; };
  const ValidityReport r = validate_hypothesis(Potential::custom(q, dq, {}));
  EXPECT_FALSE(r.valid);
  ASSERT_TRUE(r.offending_x.has_value());
  EXPECT_GT(*r.offending_x, 50.0);
}

TEST(Hypothesis, OscillatingPotentialFlagsRatioTrend) {
  // q' / q^(3/2) does not settle when the potential carries a growing oscillation.
  auto q = [](double x) { return x * x * (1.5 + std::sin(x * x)); };
  auto dq = [](double x) { return 2.0 * x * (1.5 + std::sin(x * x)) + 2.0 * x * x * x * std::cos(x * x); };
  const ValidityReport r = validate_hypothesis(Potential::custom(q, dq, {}), GridSpec{4096, 1e3});
  EXPECT_FALSE(r.all_passed());
}
