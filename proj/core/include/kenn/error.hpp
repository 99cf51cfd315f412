#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kenn {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes or layouts do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A value violates an operation's precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed clause, schema, CSV or checkpoint text. Line and column are
// 1-based; zero means unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error(format(message, line, column)), line_(line), column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  static std::string format(const std::string& message, std::size_t line, std::size_t column) {
    if (line == 0) return message;
    return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message;
  }

  std::size_t line_;
  std::size_t column_;
};

}  // namespace kenn
