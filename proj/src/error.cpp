#include "ferrosyn/error.hpp"

namespace ferrosyn {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutOfCalibratedRange: return "OutOfCalibratedRange";
    case ErrorCode::PulseTooShort: return "PulseTooShort";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::NonPositiveCurrent: return "NonPositiveCurrent";
    case ErrorCode::NegativeDiscriminant: return "NegativeDiscriminant";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::InsufficientSwitchingEvents: return "InsufficientSwitchingEvents";
    case ErrorCode::BadShape: return "BadShape";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::Truncated: return "Truncated";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace ferrosyn
