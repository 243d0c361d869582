#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rlrepro {

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind { validation = 1, numeric = 2, io = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Bad input: malformed documents, schema violations, broken preconditions.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::validation, what) {}
};

/// Syntax error carrying a 1-based line/column position.
class SyntaxError : public ValidationError {
 public:
  SyntaxError(const std::string& what, std::size_t line, std::size_t column)
      : ValidationError(what + " (line " + std::to_string(line) + ", column " +
                        std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Schema violation naming the offending key.
class SchemaError : public ValidationError {
 public:
  SchemaError(const std::string& key, const std::string& constraint)
      : ValidationError("schema violation: '" + key + "' " + constraint),
        key_(key) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what)
      : Error(ErrorKind::numeric, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ErrorKind::numeric, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::validation:
      return "validation";
    case ErrorKind::numeric:
      return "numeric";
    case ErrorKind::io:
      return "io";
  }
  return "unknown";
}

}  // namespace rlrepro
