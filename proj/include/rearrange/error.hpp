#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rearrange {

enum class ErrorCode {
  kInvalidArgument,
  kPlanningInfeasible,
  kInfeasibleAssignment,
  kBoundViolation,
  kGoalInCollision,
  kStartInCollision,
  kNoPathFound,
  kUnknownObject,
  kDivergence,
  kCollisionAbort,
  kMalformedState,
  kDimensionMismatch,
  kUnknownCategory,
  kParseError,
  kIoError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so the
// CLI can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rearrange
