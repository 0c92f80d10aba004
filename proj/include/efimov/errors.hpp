#pragma once

#include <stdexcept>
#include <string>

namespace efimov {

enum class ErrorCode {
  RhoTooSmall,
  ScatteringLengthNearZero,
  NoConvergence,
  NodeAtMatch,
  NoBoundState,
  ZeroInput,
  PoleAt,
  NoRootInBracket,
  PoleCollision,
  DegenerateEigenvalue,
  StepTooLarge,
  InvalidArgument,
  Config,
};

inline const char *to_string(ErrorCode c) {
  switch (c) {
  case ErrorCode::RhoTooSmall: return "RhoTooSmall";
  case ErrorCode::ScatteringLengthNearZero: return "ScatteringLengthNearZero";
  case ErrorCode::NoConvergence: return "NoConvergence";
  case ErrorCode::NodeAtMatch: return "NodeAtMatch";
  case ErrorCode::NoBoundState: return "NoBoundState";
  case ErrorCode::ZeroInput: return "ZeroInput";
  case ErrorCode::PoleAt: return "PoleAt";
  case ErrorCode::NoRootInBracket: return "NoRootInBracket";
  case ErrorCode::PoleCollision: return "PoleCollision";
  case ErrorCode::DegenerateEigenvalue: return "DegenerateEigenvalue";
  case ErrorCode::StepTooLarge: return "StepTooLarge";
  case ErrorCode::InvalidArgument: return "InvalidArgument";
  case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}
  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string &what) {
  throw Error(code, what);
}

} // namespace efimov
