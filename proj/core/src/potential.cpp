#include "specdet/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "specdet/errors.hpp"

namespace specdet {

std::string to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::Linear: return "linear";
    case PotentialKind::PowerLaw: return "power";
    case PotentialKind::Quadratic: return "quadratic";
    case PotentialKind::Custom: return "custom";
  }
  return "unknown";
}

namespace {

void check_constants(const HypothesisConstants& k) {
  if (!(k.C0 > 0.0) || !std::isfinite(k.C0)) throw UsageError("C0 must be positive");
  if (!(k.eps0 > 0.0) || !std::isfinite(k.eps0)) throw UsageError("eps0 must be positive");
  if (!std::isfinite(k.x0)) throw UsageError("x0 must be finite");
}

}  // namespace

Potential Potential::linear(HypothesisConstants constants) {
  check_constants(constants);
  Potential pot;
  pot.kind_ = PotentialKind::Linear;
  pot.c_ = 1.0;
  pot.p_ = 1.0;
  pot.constants_ = constants;
  return pot;
}

Potential Potential::quadratic(HypothesisConstants constants) {
  check_constants(constants);
  Potential pot;
  pot.kind_ = PotentialKind::Quadratic;
  pot.c_ = 1.0;
  pot.p_ = 2.0;
  pot.constants_ = constants;
  return pot;
}

Potential Potential::power_law(double c, double p, std::optional<HypothesisConstants> constants) {
  if (!(c > 0.0) || !std::isfinite(c)) throw UsageError("power law amplitude c must be positive");
  if (!(p > 0.0) || !std::isfinite(p)) throw UsageError("power law exponent p must be positive");
  HypothesisConstants k;
  if (constants) {
    k = *constants;
  } else {
    k.x0 = 1.0;
    k.C0 = c;
    k.eps0 = p > 2.0 / 3.0 ? std::min(0.25, 0.5 * (p - 2.0 / 3.0)) : 0.25;
  }
  check_constants(k);
  Potential pot;
  pot.kind_ = PotentialKind::PowerLaw;
  pot.c_ = c;
  pot.p_ = p;
  pot.constants_ = k;
  return pot;
}

Potential Potential::custom(Evaluator q, Evaluator q_prime, HypothesisConstants constants) {
  if (!q || !q_prime) throw UsageError("custom potentials need both q and q'");
  check_constants(constants);
  Potential pot;
  pot.kind_ = PotentialKind::Custom;
  pot.constants_ = constants;
  pot.custom_q_ = std::move(q);
  pot.custom_q_prime_ = std::move(q_prime);
  const double base = std::max(1.0, std::abs(constants.x0));
  const double q_lo = pot.custom_q_(100.0 * base);
  const double q_hi = pot.custom_q_(1000.0 * base);
  if (q_lo > 0.0 && q_hi > 0.0 && std::isfinite(q_lo) && std::isfinite(q_hi)) {
    pot.custom_growth_ = std::log(q_hi / q_lo) / std::log(10.0);
  }
  return pot;
}

Potential Potential::with_x0(double x0) const {
  Potential copy = *this;
  copy.constants_.x0 = x0;
  return copy;
}

double Potential::q(double x) const {
  if (kind_ == PotentialKind::Custom) return custom_q_(x);
  if (kind_ == PotentialKind::Linear) return x;
  if (kind_ == PotentialKind::Quadratic) return x * x;
  return c_ * std::pow(x, p_);
}

double Potential::q_prime(double x) const {
  if (kind_ == PotentialKind::Custom) return custom_q_prime_(x);
  if (kind_ == PotentialKind::Linear) return 1.0;
  if (kind_ == PotentialKind::Quadratic) return 2.0 * x;
  return c_ * p_ * std::pow(x, p_ - 1.0);
}

std::size_t Potential::derivatives(double x, std::span<double> out) const {
  if (out.empty()) return 0;
  if (kind_ == PotentialKind::Custom) {
    out[0] = custom_q_(x);
    if (out.size() == 1) return 1;
    out[1] = custom_q_prime_(x);
    if (out.size() == 2) return 2;
    const double h = 1e-4 * std::max(1.0, std::abs(x));
    out[2] = (custom_q_prime_(x + h) - custom_q_prime_(x - h)) / (2.0 * h);
    for (std::size_t k = 3; k < out.size(); ++k) out[k] = 0.0;
    return 3;
  }
  // c * p (p-1) ... (p-k+1) x^(p-k)
  double coeff = c_;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = coeff == 0.0 ? 0.0 : coeff * std::pow(x, p_ - static_cast<double>(k));
    coeff *= (p_ - static_cast<double>(k));
  }
  return out.size();
}

double Potential::growth_exponent() const {
  return kind_ == PotentialKind::Custom ? custom_growth_ : p_;
}

double Potential::turning_point(double level) const {
  if (kind_ != PotentialKind::Custom) {
    if (level <= 0.0) return 0.0;
    return std::pow(level / c_, 1.0 / p_);
  }
  const double tiny = 1e-12;
  if (custom_q_(tiny) >= level) return 0.0;
  double lo = tiny;
  double hi = 1.0;
  while (custom_q_(hi) < level) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) throw NumericalError("turning_point: potential does not reach the requested level", lo);
  }
  for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (custom_q_(mid) < level ? lo : hi) = mid;
  }
  return hi;
}

double Potential::lower_bound() const {
  if (kind_ != PotentialKind::Custom) return 0.0;
  double lowest = std::numeric_limits<double>::infinity();
  const double top = 10.0 * std::max(1.0, constants_.x0);
  for (int i = 0; i <= 4000; ++i) {
    const double x = 1e-9 + top * i / 4000.0;
    lowest = std::min(lowest, custom_q_(x));
  }
  return lowest;
}

// ---------------------------------------------------------------------------

ValidityReport validate_hypothesis(const Potential& pot, const GridSpec& grid) {
  ValidityReport report;
  report.lower_bound.name = "lower_bound";
  report.ratio_decay.name = "ratio_decay";
  report.integrability.name = "integrability";

  const double x0 = pot.x0();
  if (!(x0 > 0.0)) {
    report.valid = false;
    report.offending_x = x0;
    report.error = "x0 must be positive";
    return report;
  }
  if (grid.points < 16 || !(grid.x_max_factor > 1.0)) {
    report.valid = false;
    report.error = "grid needs at least 16 points and x_max > x0";
    return report;
  }

  const std::size_t n = grid.points;
  const double x_max = x0 * grid.x_max_factor;
  const double log_step = std::log(grid.x_max_factor) / static_cast<double>(n - 1);
  std::vector<double> xs(n), qs(n), dqs(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = i + 1 == n ? x_max : x0 * std::exp(log_step * static_cast<double>(i));
    qs[i] = pot.q(xs[i]);
    dqs[i] = pot.q_prime(xs[i]);
    if (!std::isfinite(qs[i]) || !std::isfinite(dqs[i])) {
      report.valid = false;
      report.offending_x = xs[i];
      report.error = "potential evaluator returned a non-finite value";
      return report;
    }
  }

  // q(x) / x^(2/3 + eps0) >= C0
  {
    const double expo = 2.0 / 3.0 + pot.eps0();
    double worst = std::numeric_limits<double>::infinity();
    double worst_x = x0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = qs[i] / std::pow(xs[i], expo);
      if (r < worst) {
        worst = r;
        worst_x = xs[i];
      }
    }
    auto& c = report.lower_bound;
    c.value = worst;
    c.margin = worst - pot.C0();
    c.passed = worst >= pot.C0() * (1.0 - 1e-12);
    std::ostringstream os;
    os << "min q/x^(2/3+eps0) = " << worst << " at x = " << worst_x << " (C0 = " << pot.C0() << ")";
    c.detail = os.str();
  }

  // |q'/q| q^(-1/2): maximum over the upper half, monotone decrease over the top decade.
  {
    auto& c = report.ratio_decay;
    std::vector<double> ratio(n);
    bool positive = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (qs[i] <= 0.0) {
        positive = false;
        ratio[i] = std::numeric_limits<double>::infinity();
      } else {
        ratio[i] = std::abs(dqs[i] / qs[i]) / std::sqrt(qs[i]);
      }
    }
    double upper_max = 0.0;
    for (std::size_t i = n / 2; i < n; ++i) upper_max = std::max(upper_max, ratio[i]);
    std::size_t decade_start = n - 1;
    while (decade_start > 0 && xs[decade_start - 1] >= x_max / 10.0) --decade_start;
    bool monotone = positive;
    for (std::size_t i = decade_start + 1; i < n && monotone; ++i) {
      if (ratio[i] > ratio[i - 1] * (1.0 + 1e-12)) monotone = false;
    }
    const bool shrinking = positive && ratio[n - 1] < ratio[decade_start];
    c.value = upper_max;
    c.margin = positive ? 1.0 - ratio[n - 1] / ratio[decade_start] : -1.0;
    c.passed = monotone && shrinking;
    c.detail = c.passed ? "numerically consistent: monotone decrease over the top decade"
                        : "ratio does not decrease over the top decade";
  }

  // Total variation of g = q^(-3/2) q' equals the L^1 norm of g' for piecewise monotone g.
  {
    auto& c = report.integrability;
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = dqs[i] / std::pow(std::abs(qs[i]), 1.5);
    auto variation_up_to = [&](double x_end) {
      double tv = 0.0;
      for (std::size_t i = 1; i < n && xs[i] <= x_end * (1.0 + 1e-12); ++i) tv += std::abs(g[i] - g[i - 1]);
      return tv;
    };
    const double tv100 = variation_up_to(x_max / 100.0);
    const double tv10 = variation_up_to(x_max / 10.0);
    const double tv = variation_up_to(x_max);
    const double d1 = tv10 - tv100;
    const double d2 = tv - tv10;
    bool convergent = std::isfinite(tv);
    double tail = 0.0;
    if (d2 > 0.0) {
      if (d1 > 0.0 && d2 < d1) {
        const double rho = d2 / d1;
        tail = d2 * rho / (1.0 - rho);
      } else {
        convergent = false;
      }
    }
    report.tail_estimate = tail;
    c.value = tv;
    c.margin = convergent ? 1.0 - (d1 > 0.0 ? d2 / d1 : 0.0) : -1.0;
    c.passed = convergent;
    std::ostringstream os;
    os << (convergent ? "numerically consistent: " : "not convergent: ") << "integral over grid = " << tv
       << ", tail estimate = " << tail;
    c.detail = os.str();
  }
  return report;
}

}  // namespace specdet
