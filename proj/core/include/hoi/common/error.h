#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hoi {

enum class ErrorCode {
  InvalidArgument,
  BehindCamera,
  NotWatertight,
  DegenerateCloud,
  UnderConstrained,
  NonFinite,
  DimensionMismatch,
  LengthMismatch,
  ShapeMismatch,
  SequenceTooShort,
  MissingMask,
  SchemaVersionMismatch,
  MissingAsset,
  InvariantViolation,
  ParseError,
  IoError,
};

std::string_view toString(ErrorCode code);

/// Exception carrying a machine-readable error code. All fallible library
/// operations throw this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(toString(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept {
    return code_;
  }

 private:
  ErrorCode code_;
};

}  // namespace hoi
