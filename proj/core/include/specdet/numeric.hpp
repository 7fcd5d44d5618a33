#pragma once

// Small numerical toolkit shared by the modules: complex dual numbers for
// z-derivatives, log-scaled scalars, adaptive Gauss-Kronrod and Gauss-Legendre rules.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <queue>
#include <vector>

namespace specdet {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// A complex number kept as mantissa * exp(log_scale); survives values far outside double range.
struct ScaledValue {
  cplx mantissa{0.0, 0.0};
  double log_scale = 0.0;

  cplx value() const { return mantissa * std::exp(log_scale); }
  /// Natural log of |value|; -inf for an exact zero.
  double log_abs() const { return std::log(std::abs(mantissa)) + log_scale; }
  /// Principal complex log (imaginary part in (-pi, pi]).
  cplx log() const { return std::log(mantissa) + log_scale; }
};

inline ScaledValue operator*(const ScaledValue& a, const ScaledValue& b) {
  return {a.mantissa * b.mantissa, a.log_scale + b.log_scale};
}

inline ScaledValue operator/(const ScaledValue& a, const ScaledValue& b) {
  return {a.mantissa / b.mantissa, a.log_scale - b.log_scale};
}

/// Ratio a/b of two scaled values as an ordinary complex number.
inline cplx ratio(const ScaledValue& a, const ScaledValue& b) {
  return a.mantissa / b.mantissa * std::exp(a.log_scale - b.log_scale);
}

// ---------------------------------------------------------------------------
// Forward-mode dual numbers over C: v + d*eps with eps^2 = 0.
// Used to carry d/dz through the WKB seed construction.

struct Dual {
  cplx v{0.0, 0.0};
  cplx d{0.0, 0.0};

  Dual() = default;
  Dual(cplx value, cplx deriv = {}) : v(value), d(deriv) {}
  Dual(double value) : v(value), d(0.0) {}  // NOLINT(google-explicit-constructor)

  Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
  Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
  Dual& operator*=(const Dual& o) { d = d * o.v + v * o.d; v *= o.v; return *this; }
  Dual& operator/=(const Dual& o) {
    d = (d * o.v - v * o.d) / (o.v * o.v);
    v /= o.v;
    return *this;
  }
};

inline Dual operator+(Dual a, const Dual& b) { return a += b; }
inline Dual operator-(Dual a, const Dual& b) { return a -= b; }
inline Dual operator*(Dual a, const Dual& b) { return a *= b; }
inline Dual operator/(Dual a, const Dual& b) { return a /= b; }
inline Dual operator-(const Dual& a) { return {-a.v, -a.d}; }
inline Dual operator*(double s, const Dual& a) { return {s * a.v, s * a.d}; }
inline Dual operator*(const Dual& a, double s) { return {s * a.v, s * a.d}; }

inline Dual sqrt(const Dual& a) {
  const cplx r = std::sqrt(a.v);
  return {r, a.d / (2.0 * r)};
}
inline Dual log(const Dual& a) { return {std::log(a.v), a.d / a.v}; }
inline Dual exp(const Dual& a) {
  const cplx e = std::exp(a.v);
  return {e, e * a.d};
}
inline Dual pow(const Dual& a, double p) {
  const cplx r = std::pow(a.v, p);
  return {r, p * r / a.v * a.d};
}

// magnitude() drives error estimates in the generic quadrature.
inline double magnitude(double x) { return std::abs(x); }
inline double magnitude(const cplx& x) { return std::abs(x); }
inline double magnitude(const Dual& x) { return std::max(std::abs(x.v), std::abs(x.d)); }

// ---------------------------------------------------------------------------
// Quadrature

template <class T>
struct QuadResult {
  T value{};
  double error = 0.0;
  int evaluations = 0;
  bool converged = false;
};

namespace detail {

inline constexpr double kGkNodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kGkWeights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// 7-point Gauss weights for nodes kGkNodes[1], [3], [5], [7].
inline constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T, class F>
void gk15(F& f, double a, double b, T& result, double& error) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const T fc = f(center);
  T kronrod = kGkWeights[7] * fc;
  T gauss = kGaussWeights[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kGkNodes[j];
    const T f1 = f(center - dx);
    const T f2 = f(center + dx);
    const T sum = f1 + f2;
    kronrod += kGkWeights[j] * sum;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
  }
  result = half * kronrod;
  error = magnitude(half * (kronrod - gauss));
}

}  // namespace detail

/// Globally adaptive 7-15 Gauss-Kronrod quadrature on a finite interval.
/// T needs +, scalar *, and a magnitude() overload.
template <class F>
auto integrate_gk(F&& f, double a, double b, double abs_tol, double rel_tol,
                  int max_intervals = 4000) -> QuadResult<decltype(f(a))> {
  using T = decltype(f(a));
  struct Piece {
    double a, b;
    T value;
    double error;
    bool operator<(const Piece& o) const { return error < o.error; }
  };
  QuadResult<T> out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  std::priority_queue<Piece> heap;
  Piece first{a, b, T{}, 0.0};
  detail::gk15<T>(f, a, b, first.value, first.error);
  out.evaluations = 15;
  T total = first.value;
  double total_err = first.error;
  heap.push(first);
  int intervals = 1;
  while (total_err > std::max(abs_tol, rel_tol * magnitude(total))) {
    if (intervals >= max_intervals) break;
    Piece worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > std::min(worst.a, worst.b) && mid < std::max(worst.a, worst.b))) {
      heap.push(worst);
      break;
    }
    Piece left{worst.a, mid, T{}, 0.0};
    Piece right{mid, worst.b, T{}, 0.0};
    detail::gk15<T>(f, left.a, left.b, left.value, left.error);
    detail::gk15<T>(f, right.a, right.b, right.value, right.error);
    out.evaluations += 30;
    total = total + (-1.0) * worst.value + left.value + right.value;
    heap.push(left);
    heap.push(right);
    ++intervals;
    total_err += left.error + right.error - worst.error;
    if (total_err < 0.0) total_err = 0.0;
  }
  // Recompute the sum from the pieces to shed accumulated cancellation.
  T sum{};
  double err = 0.0;
  while (!heap.empty()) {
    sum = sum + heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  out.value = sum;
  out.error = err;
  out.converged = err <= std::max(abs_tol, rel_tol * magnitude(sum));
  return out;
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussLegendreRule gauss_legendre(int n);

}  // namespace specdet

namespace specdet {

/// d/dz of log F at z from a branch-safe 5-point stencil with one Richardson pass.
/// `log_f` returns a complex logarithm; differences are wrapped into (-pi, pi].
template <class F>
cplx derivative_of_log(F&& log_f, cplx z, double h) {
  const cplx center = log_f(z);
  auto diff = [&](double k) {
    cplx d = log_f(z + k * h) - center;
    const double two_pi = 2.0 * kPi;
    double im = std::remainder(d.imag(), two_pi);
    return cplx(d.real(), im);
  };
  auto stencil = [&](double step_factor) {
    const double s = step_factor;
    const cplx d1 = diff(s), dm1 = diff(-s), d2 = diff(2.0 * s), dm2 = diff(-2.0 * s);
    return (8.0 * (d1 - dm1) - (d2 - dm2)) / (12.0 * s * h);
  };
  const cplx coarse = stencil(1.0);
  const cplx fine = stencil(0.5);
  return (16.0 * fine - coarse) / 15.0;
}

}  // namespace specdet
