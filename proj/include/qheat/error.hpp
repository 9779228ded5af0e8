#pragma once

#include <stdexcept>
#include <string>

namespace qheat {

enum class ErrorCode {
  InvalidArgument,
  NotHermitian,
  DegenerateSpectrum,
  EnumerationTooLarge,
  UnreachableMean,
  MomentMismatch,
  ConfigError,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorCode::EnumerationTooLarge: return "EnumerationTooLarge";
    case ErrorCode::UnreachableMean: return "UnreachableMean";
    case ErrorCode::MomentMismatch: return "MomentMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), message_(what) {}

  ErrorCode code() const noexcept { return code_; }
  // what() without the code prefix, for re-raising with more context
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorCode::InvalidArgument, what);
}

}  // namespace qheat
