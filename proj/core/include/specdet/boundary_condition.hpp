#pragma once

#include <cmath>

#include "specdet/errors.hpp"
#include "specdet/numeric.hpp"

namespace specdet {

/// sin(alpha) g'(0) + cos(alpha) g(0) = 0 with alpha in [0, pi).
/// alpha = 0 is Dirichlet, alpha = pi/2 Neumann.
class BoundaryCondition {
 public:
  BoundaryCondition() = default;
  explicit BoundaryCondition(double alpha) : alpha_(alpha) {
    if (!(alpha >= 0.0 && alpha < kPi)) throw UsageError("alpha must lie in [0, pi)");
  }

  double alpha() const { return alpha_; }
  double sin() const { return std::sin(alpha_); }
  double cos() const { return std::cos(alpha_); }

  /// Angle atan2(g, g') of a solution satisfying the condition at 0, reduced to [0, pi).
  double boundary_angle() const { return alpha_ == 0.0 ? 0.0 : kPi - alpha_; }

 private:
  double alpha_ = 0.0;
};

}  // namespace specdet
