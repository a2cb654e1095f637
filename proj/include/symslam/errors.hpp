#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace symslam {

// Every failure the library reports maps to one of these codes. The C API
// forwards them as integer status values, so the numbering is stable.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kRotationNearPi = 2,
  kDegenerateMatrix = 3,
  kEmptyPointmap = 4,
  kNonPositiveConfidence = 5,
  kNonPositiveNormalizer = 6,
  kZeroConfidence = 7,
  kInsufficientLandmarks = 8,
  kInsufficientOverlap = 9,
  kDimensionMismatch = 10,
  kDegenerateDenominator = 11,
  kDuplicatePass = 12,
  kSingularNormalEquations = 13,
  kDisconnectedGraph = 14,
  kMissingNode = 15,
  kDegenerateConfiguration = 16,
  kNoAssociations = 17,
  kEmptyCloud = 18,
  kUnknownVariant = 19,
  kParseError = 20,
  kIoError = 21,
};

std::string_view error_code_name(ErrorCode code);

// Thrown by every module. `module()` names the subsystem that raised it so
// the CLI can print module-qualified diagnostics.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string module, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorCode code_;
  std::string module_;
};

}  // namespace symslam
