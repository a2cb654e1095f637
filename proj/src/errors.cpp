#include "symslam/errors.hpp"

namespace symslam {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kRotationNearPi: return "RotationNearPi";
    case ErrorCode::kDegenerateMatrix: return "DegenerateMatrix";
    case ErrorCode::kEmptyPointmap: return "EmptyPointmap";
    case ErrorCode::kNonPositiveConfidence: return "NonPositiveConfidence";
    case ErrorCode::kNonPositiveNormalizer: return "NonPositiveNormalizer";
    case ErrorCode::kZeroConfidence: return "ZeroConfidence";
    case ErrorCode::kInsufficientLandmarks: return "InsufficientLandmarks";
    case ErrorCode::kInsufficientOverlap: return "InsufficientOverlap";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kDegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::kDuplicatePass: return "DuplicatePass";
    case ErrorCode::kSingularNormalEquations: return "SingularNormalEquations";
    case ErrorCode::kDisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::kMissingNode: return "MissingNode";
    case ErrorCode::kDegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::kNoAssociations: return "NoAssociations";
    case ErrorCode::kEmptyCloud: return "EmptyCloud";
    case ErrorCode::kUnknownVariant: return "UnknownVariant";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, std::string module, const std::string& message)
    : std::runtime_error(module + ": " + std::string(error_code_name(code)) +
                         ": " + message),
      code_(code),
      module_(std::move(module)) {}

}  // namespace symslam
