#include "dpht/error.hpp"

namespace dpht {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NonRectangular: return "NonRectangular";
    case ErrorCode::NegativeCount: return "NegativeCount";
    case ErrorCode::NonIntegerCount: return "NonIntegerCount";
    case ErrorCode::UnknownFixture: return "UnknownFixture";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NonPositiveEpsilon: return "NonPositiveEpsilon";
    case ErrorCode::NonPositiveSensitivity: return "NonPositiveSensitivity";
    case ErrorCode::ZeroThetaCell: return "ZeroThetaCell";
    case ErrorCode::ZeroExpectedCell: return "ZeroExpectedCell";
    case ErrorCode::DegenerateMargins: return "DegenerateMargins";
    case ErrorCode::DegenerateTotal: return "DegenerateTotal";
    case ErrorCode::DegeneratePooledCell: return "DegeneratePooledCell";
    case ErrorCode::SamplerFailure: return "SamplerFailure";
    case ErrorCode::UnsupportedShape: return "UnsupportedShape";
    case ErrorCode::TooLarge: return "TooLarge";
  }
  return "Unknown";
}

ErrorClass classify(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyInput:
    case ErrorCode::NonRectangular:
    case ErrorCode::NegativeCount:
    case ErrorCode::NonIntegerCount:
    case ErrorCode::UnknownFixture:
    case ErrorCode::InvalidArgument:
    case ErrorCode::OutOfRange:
      return ErrorClass::Data;
    case ErrorCode::TooLarge:
    case ErrorCode::UnsupportedShape:
      return ErrorClass::Infeasible;
    default:
      return ErrorClass::Numeric;
  }
}

}  // namespace dpht
