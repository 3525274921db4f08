#include "rearrange/error.hpp"

namespace rearrange {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kPlanningInfeasible: return "PLANNING_INFEASIBLE";
    case ErrorCode::kInfeasibleAssignment: return "INFEASIBLE_ASSIGNMENT";
    case ErrorCode::kBoundViolation: return "BOUND_VIOLATION";
    case ErrorCode::kGoalInCollision: return "GOAL_IN_COLLISION";
    case ErrorCode::kStartInCollision: return "START_IN_COLLISION";
    case ErrorCode::kNoPathFound: return "NO_PATH_FOUND";
    case ErrorCode::kUnknownObject: return "UNKNOWN_OBJECT";
    case ErrorCode::kDivergence: return "DIVERGENCE";
    case ErrorCode::kCollisionAbort: return "COLLISION_ABORT";
    case ErrorCode::kMalformedState: return "MALFORMED_STATE";
    case ErrorCode::kDimensionMismatch: return "DIMENSION_MISMATCH";
    case ErrorCode::kUnknownCategory: return "UNKNOWN_CATEGORY";
    case ErrorCode::kParseError: return "PARSE_ERROR";
    case ErrorCode::kIoError: return "IO_ERROR";
  }
  return "UNKNOWN";
}

}  // namespace rearrange
