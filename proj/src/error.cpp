#include "frontlab/error.hpp"

namespace frontlab {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidParam: return "InvalidParam";
    case ErrorKind::NonSymmetric: return "NonSymmetric";
    case ErrorKind::NotUnimodal: return "NotUnimodal";
    case ErrorKind::NonNormalizable: return "NonNormalizable";
    case ErrorKind::RateOutOfRange: return "RateOutOfRange";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::HalfWidthOverflow: return "HalfWidthOverflow";
    case ErrorKind::Reducible: return "Reducible";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::BoundaryMinimum: return "BoundaryMinimum";
    case ErrorKind::InvalidRates: return "InvalidRates";
    case ErrorKind::UnstableStep: return "UnstableStep";
    case ErrorKind::DomainTooSmall: return "DomainTooSmall";
    case ErrorKind::NoCrossing: return "NoCrossing";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::DominationImpossible: return "DominationImpossible";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace frontlab
