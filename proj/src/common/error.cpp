#include "hk/error.hpp"

namespace hk {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Parse: return "ParseError";
    case ErrorCode::UnboundVariable: return "UnboundVariable";
    case ErrorCode::EvaluationSingularity: return "EvaluationSingularity";
    case ErrorCode::StepCapExceeded: return "StepCapExceeded";
    case ErrorCode::DegenerateTangent: return "DegenerateTangent";
    case ErrorCode::NotASolution: return "NotASolution";
    case ErrorCode::NotDirichlet: return "NotDirichlet";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::Config: return "ConfigError";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::Internal: return "InternalError";
  }
  return "UnknownError";
}

}  // namespace hk
