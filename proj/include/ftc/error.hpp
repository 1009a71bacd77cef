#pragma once

#include <stdexcept>
#include <string>

namespace ftc {

enum class ErrorCode {
  kSingularMatrix,
  kNotSymmetric,
  kNotHurwitz,
  kNonFinite,
  kDimensionMismatch,
  kBadEdge,
  kIsolatedUnit,
  kIdentityCheckFailed,
  kInfeasible,
  kDeltaNonPositive,
  kAlphaNonPositive,
  kNotPositiveStable,
  kNonFiniteState,
  kInvalidArgument,
  kParseError,
  kValidationError,
  kSchemaError,
  kIoError,
};

const char* to_string(ErrorCode code) noexcept;

/// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ftc
