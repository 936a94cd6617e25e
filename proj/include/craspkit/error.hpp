#pragma once

#include <stdexcept>
#include <string>

namespace craspkit {

// Base for every error the library raises on bad input or unsupported
// requests.  The CLI maps these to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line, int column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// A value or request outside what an operation supports: foreign symbols,
// out-of-range positions, dialect violations, size limits.
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace craspkit
