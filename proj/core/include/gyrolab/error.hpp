#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gyrolab {

enum class ErrorCode {
  kInvalidParameter,
  kUndefinedPrecession,
  kNumericalBlowup,
  kDegenerateAxle,
  kUndefinedProjection,
  kInvalidEffect,
  kCalibration,
  kInvalidSource,
  kInvalidConfig,
  kParse,
  kConfigMismatch,
  kHalted,
  kService,
};

const char* to_string(ErrorCode code);

/// Base of every error thrown by the library. The code is stable and is what
/// the CLI and the wire protocol map onto exit codes and error strings.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class NumericalBlowup : public Error {
 public:
  NumericalBlowup(std::int64_t tick, const std::string& what)
      : Error(ErrorCode::kNumericalBlowup,
              what + " (tick " + std::to_string(tick) + ")"),
        tick_(tick) {}
  std::int64_t tick() const noexcept { return tick_; }

 private:
  std::int64_t tick_;
};

/// Parse failure carrying the 1-based line (or record) index it occurred at.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorCode::kParse, "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace gyrolab
