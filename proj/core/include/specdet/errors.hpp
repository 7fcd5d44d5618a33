#pragma once

#include <stdexcept>
#include <string>

namespace specdet {

/// Raised for malformed inputs: bad parameters, out-of-range boundary angles, unknown keys.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure cannot deliver a result at the requested accuracy.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, double position = 0.0)
      : std::runtime_error(what), position_(position) {}

  /// Last position (in x or in the spectral parameter) where the computation was healthy.
  double position() const noexcept { return position_; }

 private:
  double position_;
};

/// The spectral parameter sits on (or numerically next to) an eigenvalue.
class PoleProximityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A multivalued quantity (principal square root) cannot be continued unambiguously.
class BranchError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace specdet
