#include "contre/error.hpp"

namespace contre {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::UnknownOperator: return "UnknownOperator";
    case ErrorKind::InvalidMagnitude: return "InvalidMagnitude";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "IoError";
    case ErrorKind::Decode: return "DecodeError";
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DuplicateRecord: return "DuplicateRecord";
    case ErrorKind::NonFiniteInput: return "NonFiniteInput";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::DegenerateVariance: return "DegenerateVariance";
    case ErrorKind::ControlDegenerate: return "ControlDegenerate";
    case ErrorKind::SingleClass: return "SingleClass";
    case ErrorKind::EmptyClass: return "EmptyClass";
    case ErrorKind::SingularWithin: return "SingularWithin";
    case ErrorKind::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::InsufficientCohort: return "InsufficientCohort";
    case ErrorKind::Config: return "ConfigError";
  }
  return "Error";
}

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::UnknownOperator:
    case ErrorKind::InvalidMagnitude:
    case ErrorKind::InvalidArgument:
    case ErrorKind::InsufficientCohort:
      return 2;
    case ErrorKind::DegenerateVariance:
    case ErrorKind::ControlDegenerate:
    case ErrorKind::SingularWithin:
    case ErrorKind::SingleClass:
      return 4;
    default:
      return 3;
  }
}

}  // namespace contre
