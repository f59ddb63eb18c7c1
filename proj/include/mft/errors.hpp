#pragma once

#include <stdexcept>
#include <string>

namespace mft {

// Error categories surfaced by the library. The CLI prints the category
// name in a machine-parsable "error: <Category>: <message>" line.
enum class ErrorCode {
  OutOfBounds,
  RoleMismatch,
  UnknownBackend,
  BadConfig,
  MissingPair,
  ExtentMismatch,
  InvalidFrame,
  InvalidFrames,
  MissingState,
  ShapeMismatch,
  MissingGT,
  EmptyEvalSet,
  BadMagic,
  TruncatedFile,
  MaskMismatch,
  ExtentOverflow,
  IoError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::RoleMismatch: return "RoleMismatch";
    case ErrorCode::UnknownBackend: return "UnknownBackend";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::MissingPair: return "MissingPair";
    case ErrorCode::ExtentMismatch: return "ExtentMismatch";
    case ErrorCode::InvalidFrame: return "InvalidFrame";
    case ErrorCode::InvalidFrames: return "InvalidFrames";
    case ErrorCode::MissingState: return "MissingState";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::MissingGT: return "MissingGT";
    case ErrorCode::EmptyEvalSet: return "EmptyEvalSet";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::MaskMismatch: return "MaskMismatch";
    case ErrorCode::ExtentOverflow: return "ExtentOverflow";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace mft
