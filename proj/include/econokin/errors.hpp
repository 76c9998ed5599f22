#pragma once

#include <stdexcept>
#include <string>

namespace econokin {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A parameter set violates a type invariant (non-normalizable shape,
// weight outside [0,1], exponent at or below -1, ...).
class InvalidParamsError : public Error {
 public:
  using Error::Error;
};

// An argument is outside the domain of the operation (x < 0, eps outside
// [0,1], empty input, zero counts, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Adaptive quadrature could not reach the requested tolerance.
class QuadratureError : public Error {
 public:
  using Error::Error;
};

// The requested integral or moment does not converge.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Structured input could not be parsed; carries a 1-based location.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int row, int column = 0)
      : Error(msg + " (row " + std::to_string(row) +
              (column > 0 ? ", column " + std::to_string(column) : "") + ")"),
        row_(row),
        column_(column) {}

  int row() const { return row_; }
  int column() const { return column_; }

 private:
  int row_;
  int column_;
};

// Filesystem / missing-output failures in the CLI layer.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace econokin
