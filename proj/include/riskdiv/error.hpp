#pragma once

#include <stdexcept>
#include <string>

namespace riskdiv {

enum class ErrorCode {
  NegativeMass,
  NotNormalized,
  NoRuinRisk,
  IllegalAction,
  DomainError,
  ValidationError,
  ConfigParse,
  UnknownSubcommand,
  CapTooSmall,
  DepthTooSmall,
  InadmissiblePolicy,
  PolicyUndefined,
  TooLarge,
  UndefinedAction,
  NotABand,
  BarrierViolation,
  InvariantViolation,
  MaxIterations,
};

const char* error_code_name(ErrorCode code);

// True for codes that signal a broken internal guarantee rather than bad input.
bool is_invariant_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace riskdiv
