#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace entroscan {

/// Runtime failure categories surfaced by the library. Contract violations
/// (wrong block length, non-dyadic DWT input) are programming errors and
/// throw std::invalid_argument instead.
enum class ErrorCode {
  EmptyInput,
  InsufficientData,
  DegenerateLabels,
  ShapeError,
  UnsupportedVersion,
  ParseError,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::ShapeError: return "ShapeError";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace entroscan
