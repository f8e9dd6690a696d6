#include "rotcert/error.hpp"

namespace rotcert {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Validation: return "ValidationError";
    case ErrorCode::Dimension: return "DimensionError";
    case ErrorCode::DegenerateSet: return "DegenerateSetError";
    case ErrorCode::Config: return "ConfigError";
    case ErrorCode::Parse: return "ParseError";
    case ErrorCode::Order: return "OrderError";
    case ErrorCode::Unsupported: return "UnsupportedError";
    case ErrorCode::Parameter: return "ParameterError";
    case ErrorCode::OutOfRegime: return "OutOfRegimeError";
    case ErrorCode::NoNontrivialEta: return "NoNontrivialEta";
    case ErrorCode::InfiniteBound: return "InfiniteBound";
    case ErrorCode::VacuousBound: return "VacuousBound";
    case ErrorCode::EmptySupport: return "EmptySupportError";
    case ErrorCode::RoundingFailure: return "RoundingFailure";
    case ErrorCode::DeskScaleExceeded: return "DeskScaleExceeded";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::Usage: return "UsageError";
  }
  return "UnknownError";
}

}  // namespace rotcert
