#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace diffseer {

enum class ErrorCode {
  InvalidGraph,
  IndexMismatch,
  UnknownNode,
  ParseError,
  EmptyInput,
  InsufficientData,
  NonFiniteValue,
  RangeError,
  DomainError,
  DimensionError,
  DimensionMismatch,
  AlphaOutOfRange,
  NodeSetMismatch,
  NonFiniteDistance,
  IoError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidGraph: return "InvalidGraph";
    case ErrorCode::IndexMismatch: return "IndexMismatch";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::RangeError: return "RangeError";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::DimensionError: return "DimensionError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::AlphaOutOfRange: return "AlphaOutOfRange";
    case ErrorCode::NodeSetMismatch: return "NodeSetMismatch";
    case ErrorCode::NonFiniteDistance: return "NonFiniteDistance";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the engine carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Parse failures additionally remember the 1-based input line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : Error(ErrorCode::ParseError,
              "line " + std::to_string(line) + ": " + reason),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace diffseer
