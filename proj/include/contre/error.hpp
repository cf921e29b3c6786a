#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace contre {

enum class ErrorKind {
  UnknownOperator,
  InvalidMagnitude,
  InvalidArgument,
  Io,
  Decode,
  Parse,
  DimensionMismatch,
  DuplicateRecord,
  NonFiniteInput,
  LengthMismatch,
  DegenerateVariance,
  ControlDegenerate,
  SingleClass,
  EmptyClass,
  SingularWithin,
  DimensionTooLarge,
  EmptyDataset,
  ShapeMismatch,
  InsufficientCohort,
  Config,
};

const char* to_string(ErrorKind kind) noexcept;

/// Single exception type for the toolkit; `kind()` carries the typed reason.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  /// Positional error (line is 1-based; 0 means "not tied to a line").
  Error(ErrorKind kind, const std::string& what, std::size_t line)
      : std::runtime_error(std::string(to_string(kind)) + " at line " + std::to_string(line) +
                           ": " + what),
        kind_(kind),
        line_(line) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }

 private:
  ErrorKind kind_;
  std::size_t line_ = 0;
};

/// Exit code convention of the command-line tool.
int exit_code_for(ErrorKind kind) noexcept;

}  // namespace contre
