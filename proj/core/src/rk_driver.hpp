#pragma once

// Dormand-Prince 5(4) driver shared by the complex and real integration paths.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <utility>

#include "specdet/errors.hpp"
#include "specdet/ode_engine.hpp"

namespace specdet::detail {

inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                        b6 = 11.0 / 84;
// b - b_hat
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;

template <class S, std::size_t N>
using Vec = std::array<S, N>;

template <class S, std::size_t N>
Vec<S, N> axpy(const Vec<S, N>& y, double h, std::initializer_list<std::pair<double, const Vec<S, N>*>> terms) {
  Vec<S, N> out = y;
  for (const auto& [coef, k] : terms) {
    const double w = h * coef;
    for (std::size_t i = 0; i < N; ++i) out[i] += w * (*k)[i];
  }
  return out;
}

template <class S>
double group_max(const S* begin, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(begin[i]));
  return m;
}

/// Integrates the linear system y' = rhs(x, y) from x to x_to. Components come in
/// (value, derivative) pairs; the first pair sets the scale, which is divided out into
/// log_scale whenever it leaves [1/threshold, threshold]. `rate(x)` bounds the local
/// growth/rotation rate; each step is kept below one unit of it.
template <class S, std::size_t N, class Rhs, class Rate, class Obs>
double drive(Rhs&& rhs, Rate&& rate, double x, Vec<S, N>& y, double& log_scale, double x_to,
             const IntegratorOptions& opts, Obs&& observe) {
  if (!(opts.rel_tol > 0.0) || !(opts.abs_tol > 0.0) || opts.max_steps <= 0) {
    throw UsageError("integrator tolerances and max_steps must be positive");
  }
  if (x == x_to) return x;
  const double dir = x_to > x ? 1.0 : -1.0;
  const double span = std::abs(x_to - x);
  const double renorm_hi = opts.renorm_threshold;
  const double renorm_lo = 1.0 / opts.renorm_threshold;

  double h = dir * std::min(span, 0.05 / rate(x));
  Vec<S, N> k1 = rhs(x, y);
  long steps = 0;
  while (dir * (x_to - x) > 0.0) {
    if (++steps > opts.max_steps) throw NumericalError("integrator exhausted max_steps", x);
    const double h_cap = 1.0 / rate(x);
    if (std::abs(h) > h_cap) h = dir * h_cap;
    bool last = false;
    if (std::abs(h) >= std::abs(x_to - x) * (1.0 - 1e-12)) {
      h = x_to - x;
      last = true;
    }
    if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(x))) throw NumericalError("integrator step underflow", x);

    const Vec<S, N> k2 = rhs(x + c2 * h, axpy<S, N>(y, h, {{a21, &k1}}));
    const Vec<S, N> k3 = rhs(x + c3 * h, axpy<S, N>(y, h, {{a31, &k1}, {a32, &k2}}));
    const Vec<S, N> k4 = rhs(x + c4 * h, axpy<S, N>(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const Vec<S, N> k5 = rhs(x + c5 * h, axpy<S, N>(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const double x_new = last ? x_to : x + h;
    const Vec<S, N> k6 =
        rhs(x_new, axpy<S, N>(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const Vec<S, N> y_new = axpy<S, N>(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const Vec<S, N> k7 = rhs(x_new, y_new);

    double err = 0.0;
    const double base_scale = group_max(y.data(), 2);
    for (std::size_t g = 0; g < N; g += 2) {
      const double m = std::max(group_max(y.data() + g, 2), base_scale);
      for (std::size_t i = g; i < g + 2; ++i) {
        const S e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double sc = opts.abs_tol * m + opts.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
        err = std::max(err, std::abs(e) / sc);
      }
    }
    if (!std::isfinite(err)) throw NumericalError("integrator produced a non-finite state", x);

    if (err <= 1.0) {
      x = x_new;
      y = y_new;
      k1 = k7;
      const double m = group_max(y.data(), 2);
      if (m > renorm_hi || m < renorm_lo) {
        if (m == 0.0) throw NumericalError("solution vanished identically", x);
        const double inv = 1.0 / m;
        for (auto& v : y) v *= inv;
        for (auto& v : k1) v *= inv;
        log_scale += std::log(m);
      }
      observe(x, y, log_scale);
      const double grow = err == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
      h = dir * std::abs(h) * grow;
    } else {
      h *= std::max(0.1, 0.9 * std::pow(err, -0.2));
    }
  }
  return x;
}

template <class S, std::size_t N>
void canonicalize(Vec<S, N>& y, double& log_scale) {
  const double m = group_max(y.data(), 2);
  if (m == 0.0) return;
  const double shift = std::floor(std::log(m));
  const double factor = std::exp(-shift);
  for (auto& v : y) v *= factor;
  log_scale += shift;
}

inline double checked_q(const Potential& pot, double x) {
  const double v = pot.q(x);
  if (!std::isfinite(v)) throw NumericalError("potential is not finite", x);
  return v;
}

/// Real solution of -u'' + q u = lambda u from `from` to x_to; the observer sees (x, u, u', log_scale).
template <class Obs>
double integrate_real(const Potential& pot, double lambda, double x, Vec<double, 2>& y, double& log_scale,
                      double x_to, const IntegratorOptions& opts, Obs&& observe) {
  auto rhs = [&](double at, const Vec<double, 2>& v) -> Vec<double, 2> {
    return {v[1], (checked_q(pot, at) - lambda) * v[0]};
  };
  auto rate = [&](double at) { return std::sqrt(std::abs(pot.q(at) - lambda)) + 1.0; };
  const double end = drive<double, 2>(rhs, rate, x, y, log_scale, x_to, opts, observe);
  canonicalize<double, 2>(y, log_scale);
  return end;
}

}  // namespace specdet::detail
