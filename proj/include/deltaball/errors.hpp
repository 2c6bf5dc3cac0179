#pragma once

#include <stdexcept>
#include <string>

namespace deltaball {

/// Failure categories raised by the numerical layer.
enum class ErrorKind {
  unsupported_order,
  bracket_failure,
  overflow_guard,
  cutoff_exceeded,
  point_outside_domain,
  spectral_collision,
  coincident_points,
  pole,
  convergence_failure,
  near_singular,
  internal_consistency,
  uncertified_input,
  insufficient_cutoff,
};

inline const char *to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::unsupported_order: return "unsupported-order";
  case ErrorKind::bracket_failure: return "bracket-failure";
  case ErrorKind::overflow_guard: return "overflow-guard";
  case ErrorKind::cutoff_exceeded: return "cutoff-exceeded";
  case ErrorKind::point_outside_domain: return "point-outside-domain";
  case ErrorKind::spectral_collision: return "spectral-collision";
  case ErrorKind::coincident_points: return "coincident-points";
  case ErrorKind::pole: return "pole";
  case ErrorKind::convergence_failure: return "convergence-failure";
  case ErrorKind::near_singular: return "near-singular";
  case ErrorKind::internal_consistency: return "internal-consistency";
  case ErrorKind::uncertified_input: return "uncertified-input";
  case ErrorKind::insufficient_cutoff: return "insufficient-cutoff";
  }
  return "unknown";
}

/// Raised when a computation cannot deliver a result at the requested
/// accuracy. Precondition violations on plain arguments (negative radius,
/// mismatched sizes) are reported with std::invalid_argument instead.
class NumericalError : public std::runtime_error {
public:
  NumericalError(ErrorKind kind, const std::string &what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

} // namespace deltaball
