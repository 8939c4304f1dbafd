#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace geocount {

// Stable error identifiers. The numeric values are part of the C ABI
// (see geocount.h) and must not be reordered.
enum class ErrorCode : int {
  Ok = 0,
  InvalidArgument = 1,
  DimensionMismatch = 2,
  UnknownCovariate = 3,
  DuplicateCovariate = 4,
  ConstantColumn = 5,
  EmptySelection = 6,
  MissingColumn = 7,
  NonNumericCell = 8,
  NegativeCount = 9,
  ZeroDenominator = 10,
  DuplicateId = 11,
  InvalidCoordinate = 12,
  NameCollision = 13,
  DomainError = 14,
  NonFiniteObjective = 15,
  RankDeficientDesign = 16,
  SeparationSuspected = 17,
  SingularInformation = 18,
  ZeroStandardError = 19,
  DegenerateGeometry = 20,
  KTooLarge = 21,
  InvalidSpec = 22,
  DegenerateData = 23,
  Io = 24,
  Parse = 25,
  Internal = 26,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace geocount
