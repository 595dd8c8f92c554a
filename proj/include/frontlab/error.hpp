#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace frontlab {

enum class ErrorKind {
  InvalidParam,
  NonSymmetric,
  NotUnimodal,
  NonNormalizable,
  RateOutOfRange,
  QuadratureFailure,
  HalfWidthOverflow,
  Reducible,
  NoConvergence,
  BoundaryMinimum,
  InvalidRates,
  UnstableStep,
  DomainTooSmall,
  NoCrossing,
  InsufficientData,
  DominationImpossible,
  ParseError,
  ValidationError,
  IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every module error carries a kind so callers (and the CLI's error JSON) can
// dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace frontlab
