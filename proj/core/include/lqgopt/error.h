#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lqgopt {

enum class ErrorCode {
  kNotHurwitz,
  kNumericalFailure,
  kEigenFailure,
  kNoStabilizingSolution,
  kNotPositiveDefinite,
  kPlacementFailure,
  kDimensionMismatch,
  kInvalidPlant,
  kNotStabilizing,
  kNotMinimal,
  kSingularTransform,
  kMetricDegenerate,
  kZeroDirection,
  kStepSizeUnderflow,
  kInadmissibleStart,
  kInitFailure,
  kGenerationFailure,
  kInvalidArgument,
  kParseError,
  kIoError,
};

std::string_view ToString(ErrorCode code);

/// Single exception type thrown by the library. The code identifies the
/// failure class; the message carries the detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(ToString(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lqgopt
