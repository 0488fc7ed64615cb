#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hfvol {

enum class ErrorCode {
  ConstraintViolation,
  DomainError,
  TruncationNotConverged,
  UnsupportedSpec,
  EmbeddingNotPSD,
  StabilityViolation,
  NonFiniteState,
  SpecMismatch,
  TooFewIncrements,
  DegenerateDenominator,
  RatioOutOfDomain,
  IrregularGrid,
  MissingValue,
  HeaderMalformed,
  InvalidConfig,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so that
// callers (CLI, Python) can map it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace hfvol
