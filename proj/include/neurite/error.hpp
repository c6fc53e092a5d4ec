#pragma once

#include <stdexcept>
#include <string>

namespace neurite {

enum class ErrorCode {
  MalformedLine,
  DuplicateId,
  DanglingParent,
  CycleDetected,
  DegenerateBox,
  HeaderMismatch,
  UnsupportedDtype,
  TruncatedPayload,
  ShapeMismatch,
  NoInstances,
  EmptyDomain,
  EmptySkeleton,
  TooManyInstances,
  InvalidConfig,
  IoError,
};

// Validation errors map to CLI exit code 2, runtime errors to 1.
enum class ErrorKind { Validation, Runtime };

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, ErrorKind kind = ErrorKind::Validation)
      : std::runtime_error(std::move(message)), code_(code), kind_(kind) {}

  ErrorCode code() const { return code_; }
  ErrorKind kind() const { return kind_; }

 private:
  ErrorCode code_;
  ErrorKind kind_;
};

const char* error_code_name(ErrorCode code);

}  // namespace neurite
