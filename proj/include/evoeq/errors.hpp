#pragma once

#include <stdexcept>
#include <string>

namespace evoeq {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Operand dimensions are inconsistent.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A required accretivity bound Re T >= c > 0 does not hold.
class AccretivityError : public Error {
 public:
  AccretivityError(const std::string& what, double measured_bound)
      : Error(what), measured_bound(measured_bound) {}
  double measured_bound;
};

/// A block that must be invertible is numerically singular.
class SingularBlockError : public Error {
 public:
  SingularBlockError(const std::string& what, double rcond)
      : Error(what), rcond(rcond) {}
  double rcond;
};

/// An operator fails one of the Schur-class membership conditions.
class MembershipError : public Error {
 public:
  MembershipError(const std::string& what, std::string condition)
      : Error(what), condition(std::move(condition)) {}
  std::string condition;
};

/// Structural precondition (skewness, kernel compatibility, ...) violated.
class StructureError : public Error {
 public:
  using Error::Error;
};

/// Evaluation outside the admissible right half-plane.
class HalfPlaneDomainError : public Error {
 public:
  using Error::Error;
};

/// Signal carries too much energy in the top frequency octave.
class AliasingError : public Error {
 public:
  AliasingError(const std::string& what, double fraction)
      : Error(what), fraction(fraction) {}
  double fraction;
};

/// The coercivity certificate Re zM(z) >= c > 0 failed.
class WellPosednessError : public Error {
 public:
  WellPosednessError(const std::string& what, double measured_c)
      : Error(what), measured_c(measured_c) {}
  double measured_c;
};

/// A per-frequency linear solve failed.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double xi) : Error(what), xi(xi) {}
  double xi;
};

/// A coefficient pattern cannot be represented on the requested grid.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// A model parameter set violates one of its stated inequalities.
class ConditionError : public Error {
 public:
  ConditionError(const std::string& what, std::string condition)
      : Error(what), condition(std::move(condition)) {}
  std::string condition;
};

/// A postcondition the implementation guarantees was measurably violated.
class InternalConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration or serialized input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace evoeq
