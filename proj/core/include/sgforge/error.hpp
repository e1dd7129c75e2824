#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sgforge {

enum class ErrorKind {
  EmptyLabel,
  DanglingReference,
  DuplicateObjectId,
  ParseError,
  SequenceTooLong,
  LengthMismatch,
  ShapeMismatch,
  EmptyDataset,
  IdMismatch,
  EmptyDescription,
  InvalidConfig,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Single exception type for the library; callers switch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// ParseError carrying the 1-based line of the offending row.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace sgforge
