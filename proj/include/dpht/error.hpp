#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dpht {

enum class ErrorCode {
  // input / data errors
  EmptyInput,
  NonRectangular,
  NegativeCount,
  NonIntegerCount,
  UnknownFixture,
  InvalidArgument,
  OutOfRange,
  // numeric / degenerate errors
  NonPositiveEpsilon,
  NonPositiveSensitivity,
  ZeroThetaCell,
  ZeroExpectedCell,
  DegenerateMargins,
  DegenerateTotal,
  DegeneratePooledCell,
  SamplerFailure,
  // infeasible: brute force enumeration over its cap, or a shape with no
  // closed form whose enumeration is over the cap
  TooLarge,
  UnsupportedShape,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// front ends (CLI exit codes, Python exceptions) can classify it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

enum class ErrorClass { Data, Numeric, Infeasible };

ErrorClass classify(ErrorCode code);

}  // namespace dpht
