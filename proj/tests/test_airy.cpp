#include <gtest/gtest.h>

#include <cmath>

#include "specdet/airy.hpp"
#include "specdet/errors.hpp"

using namespace specdet;

namespace {

// Negated zeros of Ai and Ai', 20-digit reference values.
constexpr double kAiZeros[] = {2.33810741045976703849, 4.08794944413097061664, 5.52055982809555105913,
                               6.78670809007175899878, 7.94413358712085312314};
constexpr double kAiPrimeZeros[] = {1.01879297164747108902, 3.24819758217983653788, 4.82009921117873563940};

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(AiryEval, ReferenceValues) {
  const AiryValues m5 = airy_eval(-5.0);
  EXPECT_NEAR(m5.ai.real(), 0.350761009024114319788, 1e-14);
  EXPECT_NEAR(m5.bi.real(), -0.138369134901600576850, 1e-14);
  const AiryValues p5 = airy_eval(5.0);
  EXPECT_LT(rel(p5.ai, 1.08344428136074417350e-4), 1e-13);
  const AiryValues z = airy_eval(0.0);
  EXPECT_NEAR(z.ai.real(), 0.355028053887817239260, 1e-15);
  EXPECT_NEAR(z.ai_prime.real(), -0.258819403792806798405, 1e-15);
}

TEST(AiryEval, WronskianAcrossRegimes) {
  // Ai Bi' - Ai' Bi = 1/pi; the products are huge off the real axis, so the tolerance scales with them.
  for (cplx t : {cplx(0.3, 0.2), cplx(-7.0, 1.0), cplx(8.0, -4.0), cplx(-20.0, 0.0), cplx(16.0, 2.0),
                 cplx(-40.0, 5.0), cplx(2.0, 12.0)}) {
    const AiryValues v = airy_eval(t);
    const cplx w = v.ai * v.bi_prime - v.ai_prime * v.bi;
    const double scale = std::abs(v.ai * v.bi_prime) + std::abs(v.ai_prime * v.bi);
    EXPECT_LT(std::abs(w - 1.0 / kPi), 1e-14 * std::max(1.0, scale)) << t;
  }
}

TEST(AiryEval, ComplexReferenceValues) {
  const AiryValues v = airy_eval(cplx(2.0, 12.0));
  EXPECT_LT(rel(v.ai, cplx(261753.41529055368, 138512.02136307016)), 1e-13);
  EXPECT_LT(rel(v.bi_prime, cplx(953926.41494972364, -388123.51341437507)), 1e-13);
  const AiryValues w = airy_eval(cplx(8.0, -4.0));
  EXPECT_LT(rel(w.ai, cplx(9.5369990916057601e-8, -1.5751050234982809e-7)), 1e-13);
  EXPECT_LT(rel(w.bi, cplx(88830.006230553486, 275033.62315423788)), 1e-13);
}

TEST(AiryEval, SatisfiesAiryEquation) {
  const cplx t(3.7, 1.1);
  const double h = 1e-3;
  const cplx second = (airy_eval(t + h).ai - 2.0 * airy_eval(t).ai + airy_eval(t - h).ai) / (h * h);
  EXPECT_LT(std::abs(second - t * airy_eval(t).ai), 1e-6 * std::abs(t * airy_eval(t).ai));
}

TEST(AiryEval, ConjugationSymmetry) {
  for (cplx t : {cplx(1.5, 2.5), cplx(-9.0, 3.0), cplx(18.0, 6.0)}) {
    const AiryValues a = airy_eval(t);
    const AiryValues b = airy_eval(std::conj(t));
    EXPECT_LT(rel(b.ai, std::conj(a.ai)), 1e-14);
    EXPECT_LT(rel(b.bi_prime, std::conj(a.bi_prime)), 1e-14);
  }
}

TEST(AiryEval, VanishesAtTabulatedZeros) {
  for (double a : kAiZeros) EXPECT_LT(std::abs(airy_eval(-a).ai), 1e-14);
  for (double a : kAiPrimeZeros) EXPECT_LT(std::abs(airy_eval(-a).ai_prime), 1e-14);
}

TEST(AiryEval, NoJumpAtAsymptoticSwitch) {
  // The asymptotic and continuation branches meet near |t| = 15.
  const double d = 1e-6;
  const cplx below = airy_eval(15.0 - d).ai;
  const cplx above = airy_eval(15.0 + d).ai;
  const AiryValues mid = airy_eval(15.0);
  EXPECT_LT(std::abs(above - below - 2.0 * d * mid.ai_prime), 1e-11 * std::abs(mid.ai));
}

TEST(AiryClosedForms, ReferenceValues) {
  const AiryClosedForms at_one = airy_closed_forms(0.0, -1.0, 1.0, 1.0);
  EXPECT_NEAR(at_one.phi0.real(), 1.08533964808298234031, 1e-13);
  EXPECT_NEAR(at_one.psi0.real(), 0.381075283576411380959, 1e-13);
  const AiryClosedForms at_zero = airy_closed_forms(0.0, -1.0, 0.0, 1.0);
  EXPECT_NEAR(at_zero.f1.real(), 1.73333401862264029325, 1e-13);
  EXPECT_EQ(at_zero.phi0, cplx(0.0));
  EXPECT_NEAR(std::abs(at_one.wronskian_f1_f2 - 1.0), 0.0, 1e-13);
}

TEST(AiryClosedForms, TraceAndDeterminant) {
  const AiryClosedForms cf = airy_closed_forms(-1.0, 0.0, 1.0, 1.0);
  EXPECT_NEAR(cf.trace.real(), -0.447310834196474041671, 1e-13);
  EXPECT_NEAR(cf.det2.real(), 0.789980359092212033630, 1e-13);
  EXPECT_NEAR(cf.trace.imag(), 0.0, 1e-15);
  EXPECT_LT(std::abs(std::exp(cf.log_det2) - cf.det2), 1e-14);
}

TEST(AiryClosedForms, CorrectionIntegral) {
  // I(z, z0, 1) = 2 sqrt(1 - z0) - 2 sqrt(1 - z) for q = x.
  const AiryClosedForms cf = airy_closed_forms(-3.0, -1.0, 1.0, 1.0);
  EXPECT_NEAR(cf.correction_integral.real(), -1.17157287525380990240, 1e-13);
}

TEST(AiryClosedForms, TrivialAtZEqualsZ0) {
  const AiryClosedForms cf = airy_closed_forms(cplx(-0.5, 0.3), cplx(-0.5, 0.3), 1.0, 1.0);
  EXPECT_LT(std::abs(cf.trace), 1e-15);
  EXPECT_LT(std::abs(cf.det2 - 1.0), 1e-15);
}

TEST(AiryClosedForms, PoleProximity) {
  EXPECT_THROW(airy_closed_forms(kAiZeros[0], 0.0, 1.0, 1.0), PoleProximityError);
}

TEST(AiryClosedForms, WronskianWithZDerivative) {
  // W(phi0, d/dz psi0) against a central difference of psi0 in z.
  const cplx z(-0.7, 0.4);
  const double x = 1.3, h = 1e-5;
  const AiryClosedForms c = airy_closed_forms(z, 0.0, x, 1.0);
  const AiryClosedForms p = airy_closed_forms(z + h, 0.0, x, 1.0);
  const AiryClosedForms m = airy_closed_forms(z - h, 0.0, x, 1.0);
  const cplx dpsi = (p.psi0 - m.psi0) / (2.0 * h);
  const cplx dpsi_prime = (p.psi0_prime - m.psi0_prime) / (2.0 * h);
  const cplx w = c.phi0 * dpsi_prime - c.phi0_prime * dpsi;
  EXPECT_LT(std::abs(w - c.wronskian_phi_psidot), 1e-5);
}

TEST(AiryClosedForms, FarWronskianNeedsLargeX) {
  const cplx z(-0.7, 0.4);
  const AiryClosedForms near = airy_closed_forms(z, 0.0, 1.3, 1.0);
  EXPECT_GT(std::abs(near.wronskian_phi_psidot - near.wronskian_phi_psidot_far), 1e-3);
  const AiryClosedForms far = airy_closed_forms(z, 0.0, 12.0, 1.0);
  EXPECT_LT(std::abs(far.wronskian_phi_psidot - far.wronskian_phi_psidot_far), 1e-15 * std::abs(far.wronskian_phi_psidot));
}

TEST(ExponentialFactor, FullFormVanishesTruncatedFormIsConstant) {
  const FactorReport r = exponential_factor_experiment({-2.0, -1.5, -1.0, -0.5, 0.5, 1.0}, 0.0);
  EXPECT_LT(r.max_residual_full, 1e-8);
  EXPECT_NEAR(r.expected_offset.real(), 0.729011132947226981419, 1e-13);
  EXPECT_LT(r.max_offset_deviation, 1e-6);
  EXPECT_LT(r.offset_spread, 1e-6);
  for (const FactorPoint& p : r.points) EXPECT_GT(p.factor_modulus, 0.0);
}
