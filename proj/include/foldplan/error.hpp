#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace foldplan {

enum class ErrorKind {
  InvalidPattern,
  DegreeTooLow,
  SchemaViolation,
  OutOfRange,
  NotFullyFolded,
  OddDegree,
  EmptyCorpus,
  EmptyBatch,
  EmptyDataset,
  LengthMismatch,
  NoValidAction,
  GenerationExhausted,
  IOFailure,
  EmptyResults,
};

std::string_view to_string(ErrorKind kind);

/// Domain error raised by the library. Programming errors (mismatched
/// vector lengths handed to the kernel, out-of-range indices in internal
/// calls) use std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace foldplan
