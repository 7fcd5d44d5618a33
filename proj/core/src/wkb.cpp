// Liouville-Green seeds for the decaying solution.
//
// The log-derivative y = f'/f solves the Riccati equation y' + y^2 = Q with Q = q - z.
// Expanding y = y0 + y1 + y2 + ... with y0 = -sqrt(Q) and
//   y_n = -(y_{n-1}' + sum_{j=1}^{n-1} y_j y_{n-j}) / (2 y0)
// gives y0 + y1 = d/dx log(Q^(-1/4) e^(-phase)); the higher terms are integrated from X to
// infinity, which fixes the normalization at infinity. Derivatives of Q enter through Taylor
// jets around each evaluation point. The spectral parameter rides along as a dual number.

#include <array>
#include <cmath>

#include "specdet/errors.hpp"
#include "specdet/ode_engine.hpp"

namespace specdet {

namespace {

constexpr int kJetLength = 9;

using std::log;
using std::pow;
using std::sqrt;

inline cplx value_of(const cplx& v) { return v; }
inline cplx value_of(const Dual& v) { return v.v; }
inline cplx deriv_of(const cplx&) { return 0.0; }
inline cplx deriv_of(const Dual& v) { return v.d; }
inline cplx spectral(cplx z, cplx) { return z; }
inline Dual spectral(cplx z, Dual) { return Dual(z, 1.0); }

template <class T>
using Jet = std::array<T, kJetLength>;

template <class T>
struct RiccatiTerms {
  std::array<T, kJetLength> at_point{};  // y_n at the expansion point
  int available = 0;                     // number of valid orders (n < available)
};

/// Taylor coefficients of q(x + s) - zz in s.
template <class T>
int q_jet(const Potential& pot, double x, const T& zz, Jet<T>& out) {
  std::array<double, kJetLength> d{};
  const int trusted = static_cast<int>(pot.derivatives(x, d));
  double factorial = 1.0;
  for (int k = 0; k < kJetLength; ++k) {
    if (k > 0) factorial *= k;
    if (!std::isfinite(d[k])) throw NumericalError("potential derivative is not finite", x);
    out[k] = T(d[k] / factorial);
  }
  out[0] = out[0] - zz;
  return trusted;
}

template <class T>
RiccatiTerms<T> riccati_terms(const Potential& pot, double x, const T& zz, int max_order) {
  Jet<T> Q{};
  const int trusted = q_jet(pot, x, zz, Q);
  const int top = std::min({kJetLength - 1, trusted - 1, max_order});

  // sqrt jet
  Jet<T> root{};
  root[0] = sqrt(Q[0]);
  for (int k = 1; k < kJetLength; ++k) {
    T acc = Q[k];
    for (int j = 1; j < k; ++j) acc = acc - root[j] * root[k - j];
    root[k] = acc / (2.0 * root[0]);
  }
  // 1 / (2 y0) = -1 / (2 root)
  Jet<T> recip{};
  recip[0] = T(1.0) / (2.0 * root[0]);
  for (int k = 1; k < kJetLength; ++k) {
    T acc{};
    for (int j = 1; j <= k; ++j) acc = acc + (2.0 * root[j]) * recip[k - j];
    recip[k] = (T{} - acc) / (2.0 * root[0]);
  }
  Jet<T> inv{};
  for (int k = 0; k < kJetLength; ++k) inv[k] = T{} - recip[k];

  std::array<Jet<T>, kJetLength> y{};
  for (int k = 0; k < kJetLength; ++k) y[0][k] = T{} - root[k];

  RiccatiTerms<T> out;
  out.at_point[0] = y[0][0];
  out.available = 1;
  for (int n = 1; n <= top; ++n) {
    const int len = kJetLength - n;
    Jet<T> rhs{};
    for (int k = 0; k < len; ++k) {
      T acc = static_cast<double>(k + 1) * y[n - 1][k + 1];
      for (int j = 1; j < n; ++j) {
        for (int i = 0; i <= k; ++i) acc = acc + y[j][i] * y[n - j][k - i];
      }
      rhs[k] = acc;
    }
    for (int k = 0; k < len; ++k) {
      T acc{};
      for (int i = 0; i <= k; ++i) acc = acc + rhs[i] * inv[k - i];
      y[n][k] = T{} - acc;
    }
    out.at_point[n] = y[n][0];
    out.available = n + 1;
  }
  return out;
}

/// Picks the last order before the terms stop decreasing or become negligible over [X, inf).
template <class T>
int truncation_order(const RiccatiTerms<T>& terms, double X) {
  int order = std::min(1, terms.available - 1);
  const double floor = 1e-17 * std::max(1.0, magnitude(terms.at_point[0]));
  for (int n = 2; n < terms.available; ++n) {
    const double prev = magnitude(terms.at_point[n - 1]);
    const double cur = magnitude(terms.at_point[n]);
    if (n >= 3 && prev > 0.0 && cur > prev) break;
    if (cur * std::max(1.0, X) < floor) break;
    order = n;
  }
  return order;
}

template <class T>
T phase_integral(const Potential& pot, const T& zz, double X) {
  const double x0 = pot.x0();
  switch (pot.kind()) {
    case PotentialKind::Linear: {
      auto antiderivative = [&](double x) { return (2.0 / 3.0) * pow(T(cplx(x)) - zz, 1.5); };
      return antiderivative(X) - antiderivative(x0);
    }
    case PotentialKind::Quadratic: {
      auto antiderivative = [&](double x) {
        const T r = sqrt(T(cplx(x * x)) - zz);
        return 0.5 * (T(cplx(x)) * r - zz * log(T(cplx(x)) + r));
      };
      return antiderivative(X) - antiderivative(x0);
    }
    default: {
      auto integrand = [&](double x) { return sqrt(T(cplx(pot.q(x))) - zz); };
      const auto r = integrate_gk(integrand, x0, X, 1e-13, 1e-14, 20000);
      return r.value;
    }
  }
}

void check_reference_branch(const Potential& pot, cplx z, double X) {
  if (z.imag() != 0.0) return;
  const double x0 = pot.x0();
  double lowest = pot.q(x0);
  if (!pot.is_monomial()) {
    const double a = std::min(x0, X);
    const double b = std::max(x0, X);
    for (int i = 0; i <= 400; ++i) lowest = std::min(lowest, pot.q(a + (b - a) * i / 400.0));
  }
  if (!(lowest > z.real())) {
    throw BranchError("x0-anchored normalization is undefined: q(x) <= z for some x >= x0 (z real)", x0);
  }
}

/// int_X^inf sum_{n>=2} y_n dx through x = X / t^2, which leaves a smooth integrand in t.
template <class T>
T tail_integral(const Potential& pot, const T& zz, double X, int order) {
  if (order < 2) return T{};
  auto integrand = [&](double t) {
    const double x = X / (t * t);
    const RiccatiTerms<T> terms = riccati_terms(pot, x, zz, order);
    T sum{};
    for (int n = 2; n < terms.available; ++n) sum = sum + terms.at_point[n];
    return (2.0 * X / (t * t * t)) * sum;
  };
  return integrate_gk(integrand, 0.0, 1.0, 1e-16, 1e-12, 2000).value;
}

template <class T>
AugmentedState build_seed(const Potential& pot, cplx z, double X, const SeedOptions& seed) {
  if (!(pot.q(X) - z.real() > 0.0)) {
    throw NumericalError("seed point does not clear the turning point; increase X_cap", X);
  }
  const T zz = spectral(z, T{});
  const int requested = seed.max_order < 0 ? kJetLength - 1 : std::max(1, seed.max_order);
  const RiccatiTerms<T> terms = riccati_terms(pot, X, zz, requested);
  const int order = seed.max_order < 0 ? truncation_order(terms, X) : std::min(requested, terms.available - 1);

  T y{};
  for (int n = 0; n <= order; ++n) y = y + terms.at_point[n];

  T log_f = T(cplx(-0.5 * std::log(2.0))) - 0.25 * log(T(cplx(pot.q(X))) - zz);
  if (seed.normalization == Normalization::Reference) {
    check_reference_branch(pot, z, X);
    if (!seed.direction_only) log_f = log_f - phase_integral(pot, zz, X);
  }
  if (!seed.direction_only) log_f = log_f - tail_integral(pot, zz, X, order);

  const cplx lv = value_of(log_f), ld = deriv_of(log_f);
  const cplx yv = value_of(y), yd = deriv_of(y);
  AugmentedState s;
  s.base.x = X;
  s.base.log_scale = lv.real();
  cplx u = std::exp(cplx(0.0, lv.imag()));
  cplx du = yv * u;
  cplx zu = ld * u;
  cplx zdu = (yd + yv * ld) * u;
  const double shift = std::floor(std::log(std::max(std::abs(u), std::abs(du))));
  const double factor = std::exp(-shift);
  s.base.u = u * factor;
  s.base.du = du * factor;
  s.zder_u = zu * factor;
  s.zder_du = zdu * factor;
  s.base.log_scale += shift;
  return s;
}

}  // namespace

ScaledState wkb_seed(const Potential& pot, cplx z, double X, const SeedOptions& seed) {
  return build_seed<cplx>(pot, z, X, seed).base;
}

cplx wkb_green_diagonal_difference(const Potential& pot, cplx z, cplx z0, double x) {
  const double q = pot.q(x);
  if (!(q - z.real() > 0.0) || !(q - z0.real() > 0.0)) {
    throw NumericalError("diagonal asymptotics need q(x) above both spectral parameters", x);
  }
  const RiccatiTerms<cplx> a = riccati_terms(pot, x, z, kJetLength - 1);
  const RiccatiTerms<cplx> b = riccati_terms(pot, x, z0, kJetLength - 1);
  const int order = std::min(truncation_order(a, x), truncation_order(b, x));
  // Leading difference in a cancellation-free form.
  const cplx ra = -a.at_point[0], rb = -b.at_point[0];
  cplx diff = (z - z0) / (ra + rb);
  cplx sa = a.at_point[0], sb = b.at_point[0];
  for (int n = 2; n <= order; n += 2) {
    diff += a.at_point[n] - b.at_point[n];
    sa += a.at_point[n];
    sb += b.at_point[n];
  }
  return diff / (2.0 * sa * sb);
}

AugmentedState wkb_seed_zderiv(const Potential& pot, cplx z, double X, const SeedOptions& seed) {
  return build_seed<Dual>(pot, z, X, seed);
}

}  // namespace specdet
