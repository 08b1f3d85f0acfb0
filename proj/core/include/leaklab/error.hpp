#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace leaklab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed source text. Carries a 1-based line/column.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        message_(message),
        line_(line),
        column_(column) {}

  const std::string& message() const { return message_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::string message_;
  std::size_t line_;
  std::size_t column_;
};

/// Well-formed syntax that violates a static rule (types, declarations,
/// nested await, unknown locations).
class SemanticError : public Error {
 public:
  using Error::Error;
};

/// Dynamic failure while executing a program (domain overflow, negative
/// delay, non-terminating await body).
class RuntimeError : public Error {
 public:
  using Error::Error;
};

/// An assertion referenced a snapshot for a location that control has not
/// reached yet. Distinct from the assertion being false.
class SnapshotUndefined : public Error {
 public:
  using Error::Error;
};

/// A proof outline lacks an annotation that a proof rule requires.
class AnnotationError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration (cost model, lattice, scenario files, bounds).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace leaklab
