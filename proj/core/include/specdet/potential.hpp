#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace specdet {

enum class PotentialKind { Linear, PowerLaw, Quadratic, Custom };

std::string to_string(PotentialKind kind);

/// Constants of the confinement hypothesis q(x) >= C0 * x^(2/3 + eps0) for x >= x0.
/// x0 doubles as the normalization point of the Jost-type solution.
struct HypothesisConstants {
  double x0 = 1.0;
  double C0 = 1.0;
  double eps0 = 0.25;
};

/// A real confining potential q on (0, inf).
///
/// The three built-in kinds are monomials c * x^p (Linear: c = 1, p = 1; Quadratic:
/// c = 1, p = 2) and expose derivatives of every order, which the WKB seeds use.
/// Custom potentials provide q and q'; higher derivatives fall back to differencing q'.
///
/// Instances are immutable and safe to share between threads.
class Potential {
 public:
  using Evaluator = std::function<double(double)>;

  static Potential linear(HypothesisConstants constants = {});
  static Potential quadratic(HypothesisConstants constants = {});
  /// c * x^p. Any p > 0 is representable; the hypothesis itself needs p > 2/3 (see validate_hypothesis).
  static Potential power_law(double c, double p, std::optional<HypothesisConstants> constants = {});
  static Potential custom(Evaluator q, Evaluator q_prime, HypothesisConstants constants);

  PotentialKind kind() const { return kind_; }
  double c() const { return c_; }
  double p() const { return p_; }
  double x0() const { return constants_.x0; }
  double C0() const { return constants_.C0; }
  double eps0() const { return constants_.eps0; }
  const HypothesisConstants& constants() const { return constants_; }

  /// Copy with a different normalization point x0 (other constants unchanged).
  Potential with_x0(double x0) const;

  double q(double x) const;
  double q_prime(double x) const;

  /// Writes q^(k)(x) for k = 0..out.size()-1 where available and returns how many
  /// entries are trustworthy (all of them for monomials, at most 3 for Custom).
  std::size_t derivatives(double x, std::span<double> out) const;

  bool is_monomial() const { return kind_ != PotentialKind::Custom; }

  /// Growth exponent used for tail models: p for monomials, a log-log fit otherwise.
  double growth_exponent() const;

  /// Exponent gamma of the Weyl law lambda_k ~ A k^gamma, i.e. 2p/(p+2).
  double weyl_exponent() const { return 2.0 * growth_exponent() / (growth_exponent() + 2.0); }

  /// Smallest x >= 0 with q(x) >= level (0 if q(0) >= level). Assumes q eventually increasing.
  double turning_point(double level) const;

  /// Lower bound for q on [0, inf), used to place search brackets below the spectrum.
  double lower_bound() const;

 private:
  Potential() = default;

  PotentialKind kind_ = PotentialKind::Linear;
  double c_ = 1.0;
  double p_ = 1.0;
  HypothesisConstants constants_{};
  Evaluator custom_q_;
  Evaluator custom_q_prime_;
  double custom_growth_ = 1.0;
};

struct GridSpec {
  std::size_t points = 512;
  /// Upper end of the geometric grid as a multiple of x0.
  double x_max_factor = 1e4;
};

struct ConditionCheck {
  std::string name;
  bool passed = false;
  /// Headline number for the condition (minimum ratio, maximum ratio, integral value).
  double value = 0.0;
  /// Signed margin: positive means satisfied with room to spare.
  double margin = 0.0;
  std::string detail;
};

/// Numerical audit of the confinement hypothesis on a finite grid. Conditions that are
/// asymptotic statements are labelled "numerically consistent" rather than proved.
struct ValidityReport {
  bool valid = true;  // false when the potential could not even be evaluated
  std::optional<double> offending_x;
  std::string error;
  ConditionCheck lower_bound;      // q(x) >= C0 x^(2/3+eps0)
  ConditionCheck ratio_decay;      // |q'/q| q^(-1/2) -> 0
  ConditionCheck integrability;    // (q^(-3/2) q')' in L^1
  double tail_estimate = 0.0;      // estimated integral beyond the grid
  bool all_passed() const {
    return valid && lower_bound.passed && ratio_decay.passed && integrability.passed;
  }
};

ValidityReport validate_hypothesis(const Potential& pot, const GridSpec& grid = {});

}  // namespace specdet
