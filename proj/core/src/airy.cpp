#include "specdet/airy.hpp"

#include <array>
#include <cmath>

#include "specdet/errors.hpp"

namespace specdet {

namespace {

constexpr double kAi0 = 0.355028053887817239260063186004;   // 3^(-2/3) / Gamma(2/3)
constexpr double kAip0 = 0.258819403792806798405183560189;  // -Ai'(0) = 3^(-1/3) / Gamma(1/3)
constexpr double kSqrt3 = 1.732050807568877293527446341506;
constexpr double kSqrtPi = 1.772453850905516027298167483341;

constexpr double kSeriesRadius = 3.0;
constexpr double kAsymptoticRadius = 15.0;

struct Pair {
  cplx y, dy;
};

/// Kahan-compensated complex accumulator.
struct Accumulator {
  cplx sum{0.0, 0.0};
  cplx carry{0.0, 0.0};
  void add(cplx term) {
    const cplx y = term - carry;
    const cplx t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

AiryValues maclaurin(cplx t) {
  const cplx t3 = t * t * t;
  // f = sum a_k, g = sum b_k and their derivatives.
  Accumulator f, fp, g, gp;
  cplx a = 1.0, ap = t * t / 2.0, b = t, bp = 1.0;
  f.add(a);
  fp.add(ap);
  g.add(b);
  gp.add(bp);
  for (int k = 1; k < 200; ++k) {
    const double dk = k;
    a *= t3 / ((3.0 * dk - 1.0) * (3.0 * dk));
    b *= t3 / ((3.0 * dk) * (3.0 * dk + 1.0));
    bp *= t3 / ((3.0 * dk - 2.0) * (3.0 * dk));
    if (k >= 2) ap *= t3 / ((3.0 * dk - 3.0) * (3.0 * dk - 1.0));
    f.add(a);
    g.add(b);
    gp.add(bp);
    if (k >= 2) fp.add(ap);
    const double scale = std::abs(f.sum) + std::abs(g.sum) + std::abs(fp.sum) + std::abs(gp.sum);
    if (std::abs(a) + std::abs(b) + std::abs(ap) + std::abs(bp) < 1e-18 * scale) break;
  }
  AiryValues v;
  v.ai = kAi0 * f.sum - kAip0 * g.sum;
  v.ai_prime = kAi0 * fp.sum - kAip0 * gp.sum;
  v.bi = kSqrt3 * (kAi0 * f.sum + kAip0 * g.sum);
  v.bi_prime = kSqrt3 * (kAi0 * fp.sum + kAip0 * gp.sum);
  return v;
}

/// One Taylor step of y'' = t y from t0 to t0 + h.
Pair taylor_step(const Pair& start, cplx t0, cplx h) {
  cplx a_prev2 = 0.0;      // a_{n-1}
  cplx a_prev = start.y;   // a_n for n = 0
  cplx a_curr = start.dy;  // a_{n+1}
  Accumulator y, dy;
  y.add(a_prev);
  cplx hp = h;        // h^n
  cplx hp_deriv = 1.0;  // h^(n-1)
  y.add(a_curr * hp);
  dy.add(a_curr);
  // a_{n+2} = (t0 a_n + a_{n-1}) / ((n+2)(n+1))
  int quiet = 0;
  for (int n = 0; n < 400; ++n) {
    const cplx a_next = (t0 * a_prev + a_prev2) / ((n + 2.0) * (n + 1.0));
    hp_deriv = hp;
    hp *= h;
    const cplx term = a_next * hp;
    const cplx dterm = (n + 2.0) * a_next * hp_deriv;
    y.add(term);
    dy.add(dterm);
    a_prev2 = a_prev;
    a_prev = a_curr;
    a_curr = a_next;
    const double tiny = 1e-18 * (std::abs(y.sum) + std::abs(h) * std::abs(dy.sum));
    if (std::abs(term) + std::abs(h) * std::abs(dterm) <= tiny) {
      if (++quiet == 3) break;
    } else {
      quiet = 0;
    }
  }
  return {y.sum, dy.sum};
}

/// Continue a solution of the Airy equation along the straight segment from `from` to `to`.
Pair continue_solution(Pair state, cplx from, cplx to) {
  const cplx span = to - from;
  const double length = std::abs(span);
  if (length == 0.0) return state;
  const cplx dir = span / length;
  double travelled = 0.0;
  cplx t = from;
  while (travelled < length) {
    const double local = std::max(1.0, std::abs(t));
    double step = std::min(0.5, 1.5 / std::sqrt(local));
    if (travelled + step > length) step = length - travelled;
    const cplx h = step * dir;
    state = taylor_step(state, t, h);
    travelled += step;
    t = travelled >= length ? to : from + travelled * dir;
  }
  return state;
}

struct AsymptoticSums {
  cplx u_alt, v_alt;  // sum (-1)^k u_k / zeta^k, same with v_k
  cplx u_pos, v_pos;  // sum u_k / zeta^k
  // Even/odd split with alternating signs, for the negative real axis.
  cplx u_even, u_odd, v_even, v_odd;
};

AsymptoticSums asymptotic_sums(cplx zeta) {
  AsymptoticSums s{};
  double u = 1.0;
  double v = 1.0;
  cplx zpow = 1.0;
  s.u_alt = s.u_pos = s.u_even = 1.0;
  s.v_alt = s.v_pos = s.v_even = 1.0;
  double last = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 60; ++k) {
    const double dk = k;
    u *= (6.0 * dk - 5.0) * (6.0 * dk - 3.0) * (6.0 * dk - 1.0) / (216.0 * dk * (2.0 * dk - 1.0));
    v = -(6.0 * dk + 1.0) / (6.0 * dk - 1.0) * u;
    zpow /= zeta;
    const double size = std::abs(u * zpow) + std::abs(v * zpow);
    if (size > last) break;  // optimal truncation
    last = size;
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    s.u_alt += sign * u * zpow;
    s.v_alt += sign * v * zpow;
    s.u_pos += u * zpow;
    s.v_pos += v * zpow;
    // (-1)^m for index 2m or 2m+1
    const int m = k / 2;
    const double msign = (m % 2 == 0) ? 1.0 : -1.0;
    if (k % 2 == 0) {
      s.u_even += msign * u * zpow;
      s.v_even += msign * v * zpow;
    } else {
      s.u_odd += msign * u * zpow;
      s.v_odd += msign * v * zpow;
    }
    if (size < 1e-18) break;
  }
  return s;
}

Pair ai_asymptotic(cplx t) {
  const cplx root = std::sqrt(t);
  const cplx zeta = 2.0 / 3.0 * t * root;
  const cplx quarter = std::sqrt(root);
  const AsymptoticSums s = asymptotic_sums(zeta);
  const cplx e = std::exp(-zeta) / (2.0 * kSqrtPi);
  return {e / quarter * s.u_alt, -e * quarter * s.v_alt};
}

Pair bi_asymptotic(cplx t) {
  const cplx root = std::sqrt(t);
  const cplx zeta = 2.0 / 3.0 * t * root;
  const cplx quarter = std::sqrt(root);
  const AsymptoticSums s = asymptotic_sums(zeta);
  const cplx e = std::exp(zeta) / kSqrtPi;
  return {e / quarter * s.u_pos, e * quarter * s.v_pos};
}

AiryValues negative_axis_asymptotic(double x) {
  const double zeta = 2.0 / 3.0 * x * std::sqrt(x);
  const AsymptoticSums s = asymptotic_sums(cplx(zeta, 0.0));
  const double quarter = std::pow(x, 0.25);
  const double sn = std::sin(zeta + kPi / 4.0);
  const double cs = std::cos(zeta + kPi / 4.0);
  const double p = s.u_even.real(), q = s.u_odd.real(), r = s.v_even.real(), w = s.v_odd.real();
  AiryValues v;
  v.ai = (sn * p - cs * q) / (kSqrtPi * quarter);
  v.ai_prime = -quarter * (cs * r + sn * w) / kSqrtPi;
  v.bi = (cs * p + sn * q) / (kSqrtPi * quarter);
  v.bi_prime = quarter * (sn * r - cs * w) / kSqrtPi;
  return v;
}

AiryValues eval_upper(cplx t) {
  const double r = std::abs(t);
  if (r <= kSeriesRadius) return maclaurin(t);
  const double arg = std::arg(t);  // in [0, pi]
  const cplx dir = t / r;

  if (t.imag() == 0.0 && t.real() < 0.0 && r >= kAsymptoticRadius) {
    return negative_axis_asymptotic(-t.real());
  }

  // Forward continuation from the series disc serves every function that does not decay outward.
  const cplx start = kSeriesRadius * dir;
  AiryValues origin{};
  bool have_origin = false;
  auto from_origin = [&]() -> const AiryValues& {
    if (!have_origin) {
      origin = maclaurin(start);
      have_origin = true;
    }
    return origin;
  };

  AiryValues out;
  // Ai
  if (arg < kPi / 3.0) {
    const double far = std::max(r, kAsymptoticRadius);
    const cplx t_far = far * dir;
    Pair ai = ai_asymptotic(t_far);
    if (far > r) ai = continue_solution(ai, t_far, t);
    out.ai = ai.y;
    out.ai_prime = ai.dy;
  } else if (r >= kAsymptoticRadius && arg <= 2.0 * kPi / 3.0) {
    const Pair ai = ai_asymptotic(t);
    out.ai = ai.y;
    out.ai_prime = ai.dy;
  } else {
    const AiryValues& o = from_origin();
    const Pair ai = continue_solution({o.ai, o.ai_prime}, start, t);
    out.ai = ai.y;
    out.ai_prime = ai.dy;
  }
  // Bi
  if (arg < kPi / 3.0 && r >= kAsymptoticRadius) {
    const Pair bi = bi_asymptotic(t);
    out.bi = bi.y;
    out.bi_prime = bi.dy;
  } else {
    const AiryValues& o = from_origin();
    const Pair bi = continue_solution({o.bi, o.bi_prime}, start, t);
    out.bi = bi.y;
    out.bi_prime = bi.dy;
  }
  return out;
}

}  // namespace

AiryValues airy_eval(cplx t) {
  if (!(std::abs(t) <= 1000.0)) throw UsageError("airy_eval: argument outside |t| <= 1000");
  if (t.imag() < 0.0) {
    const AiryValues v = eval_upper(std::conj(t));
    return {std::conj(v.ai), std::conj(v.ai_prime), std::conj(v.bi), std::conj(v.bi_prime)};
  }
  AiryValues v = eval_upper(t);
  if (t.imag() == 0.0) {
    v.ai = v.ai.real();
    v.ai_prime = v.ai_prime.real();
    v.bi = v.bi.real();
    v.bi_prime = v.bi_prime.real();
  }
  return v;
}

AiryClosedForms airy_closed_forms(cplx z, cplx z0, double x, double x0) {
  const AiryValues at_x = airy_eval(x - z);
  const AiryValues at_0 = airy_eval(-z);
  const AiryValues at_0_ref = airy_eval(-z0);
  auto near_zero = [](const AiryValues& v) {
    return std::abs(v.ai) <= 1e-14 * std::max(1.0, std::abs(v.ai_prime));
  };
  if (near_zero(at_0)) throw PoleProximityError("airy_closed_forms: Ai(-z) vanishes (z is an eigenvalue)");
  if (near_zero(at_0_ref)) throw PoleProximityError("airy_closed_forms: Ai(-z0) vanishes (z0 is an eigenvalue)");

  AiryClosedForms c;
  const cplx s = std::pow(cplx(x0) - z, 1.5);
  const cplx grow = std::exp(2.0 / 3.0 * s);
  c.f1 = std::sqrt(2.0 * kPi) * grow * at_x.ai;
  c.f1_prime = std::sqrt(2.0 * kPi) * grow * at_x.ai_prime;
  c.f2 = std::sqrt(kPi / 2.0) / grow * at_x.bi;
  c.f2_prime = std::sqrt(kPi / 2.0) / grow * at_x.bi_prime;
  c.wronskian_f1_f2 = c.f1 * c.f2_prime - c.f1_prime * c.f2;
  c.phi0 = kPi * (at_0.ai * at_x.bi - at_0.bi * at_x.ai);
  c.phi0_prime = kPi * (at_0.ai * at_x.bi_prime - at_0.bi * at_x.ai_prime);
  c.psi0 = at_x.ai / at_0.ai;
  c.psi0_prime = at_x.ai_prime / at_0.ai;
  const cplx arg = x - z;
  c.wronskian_phi_psidot_far =
      kPi * (at_x.ai_prime * at_x.bi_prime - arg * at_x.ai * at_x.bi) - at_0.ai_prime / at_0.ai;
  c.wronskian_phi_psidot = c.wronskian_phi_psidot_far + kPi * at_0.bi / at_0.ai *
                                                         (arg * at_x.ai * at_x.ai - at_x.ai_prime * at_x.ai_prime);
  c.correction_integral = 2.0 * (std::sqrt(cplx(x0) - z0) - std::sqrt(cplx(x0) - z));
  const cplx log_deriv = at_0.ai_prime / at_0.ai;
  const cplx log_deriv_ref = at_0_ref.ai_prime / at_0_ref.ai;
  c.trace = log_deriv - log_deriv_ref;
  c.det2_truncated = at_0.ai / at_0_ref.ai;
  c.log_det2 = std::log(c.det2_truncated) + (z - z0) * log_deriv_ref;
  c.det2 = c.det2_truncated * std::exp((z - z0) * log_deriv_ref);
  return c;
}

FactorReport exponential_factor_experiment(const std::vector<cplx>& z_grid, cplx z0) {
  FactorReport report;
  report.z0 = z0;
  const AiryValues ref = airy_eval(-z0);
  report.expected_offset = -ref.ai_prime / ref.ai;
  const double h = 1e-3;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const cplx z : z_grid) {
    FactorPoint p;
    p.z = z;
    const AiryClosedForms c = airy_closed_forms(z, z0, 0.0, 1.0);
    p.trace = c.trace;
    p.dlog_full = derivative_of_log([&](cplx w) { return airy_closed_forms(w, z0, 0.0, 1.0).log_det2; }, z, h);
    p.dlog_truncated =
        derivative_of_log([&](cplx w) { return std::log(airy_closed_forms(w, z0, 0.0, 1.0).det2_truncated); }, z, h);
    p.residual_full = p.trace + p.dlog_full;
    p.residual_truncated = p.trace + p.dlog_truncated;
    p.factor_modulus = std::abs(c.det2 / c.det2_truncated);
    report.max_residual_full = std::max(report.max_residual_full, std::abs(p.residual_full));
    report.max_offset_deviation =
        std::max(report.max_offset_deviation, std::abs(p.residual_truncated - report.expected_offset));
    lo = std::min(lo, p.residual_truncated.real());
    hi = std::max(hi, p.residual_truncated.real());
    report.points.push_back(p);
  }
  report.offset_spread = report.points.empty() ? 0.0 : hi - lo;
  return report;
}

}  // namespace specdet
