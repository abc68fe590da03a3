#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wedflow {

/// Failure categories reported by the solver stack. The CLI maps each kind to
/// its own exit code, so the order here is part of the command-line contract.
enum class ErrorKind {
  GridTooSmall,
  BadExponent,
  MonotonicityViolation,
  NonSeparable,
  InnerSolveFailed,
  DomainViolation,
  MaxIterExceeded,
  LineSearchFailed,
  DivergenceDetected,
  MaxOuterIterExceeded,
  NewtonFailed,
  BracketInvalid,
  BadBounds,
  ExponentMismatch,
  PreconditionViolated,
  ConfigInvalid,
};

inline constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::GridTooSmall: return "GridTooSmall";
    case ErrorKind::BadExponent: return "BadExponent";
    case ErrorKind::MonotonicityViolation: return "MonotonicityViolation";
    case ErrorKind::NonSeparable: return "NonSeparable";
    case ErrorKind::InnerSolveFailed: return "InnerSolveFailed";
    case ErrorKind::DomainViolation: return "DomainViolation";
    case ErrorKind::MaxIterExceeded: return "MaxIterExceeded";
    case ErrorKind::LineSearchFailed: return "LineSearchFailed";
    case ErrorKind::DivergenceDetected: return "DivergenceDetected";
    case ErrorKind::MaxOuterIterExceeded: return "MaxOuterIterExceeded";
    case ErrorKind::NewtonFailed: return "NewtonFailed";
    case ErrorKind::BracketInvalid: return "BracketInvalid";
    case ErrorKind::BadBounds: return "BadBounds";
    case ErrorKind::ExponentMismatch: return "ExponentMismatch";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace wedflow
