#include "ftc/error.hpp"

namespace ftc {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kSingularMatrix: return "SingularMatrix";
    case ErrorCode::kNotSymmetric: return "NotSymmetric";
    case ErrorCode::kNotHurwitz: return "NotHurwitz";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kBadEdge: return "BadEdge";
    case ErrorCode::kIsolatedUnit: return "IsolatedUnit";
    case ErrorCode::kIdentityCheckFailed: return "IdentityCheckFailed";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kDeltaNonPositive: return "DeltaNonPositive";
    case ErrorCode::kAlphaNonPositive: return "AlphaNonPositive";
    case ErrorCode::kNotPositiveStable: return "NotPositiveStable";
    case ErrorCode::kNonFiniteState: return "NonFiniteState";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kValidationError: return "ValidationError";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace ftc
