#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lrdlsr {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes are incompatible.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A scalar argument lies outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A factorization failed or a solver produced non-finite values.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Input data could not be read or is inconsistent.
class DataError : public Error {
 public:
  DataError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : Error(format(what, line, column)), line_(line), column_(column) {}

  /// 1-based line of the offending record, 0 when not tied to a line.
  std::size_t line() const noexcept { return line_; }
  /// 1-based field index within the line, 0 when not tied to a field.
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t line, std::size_t column) {
    if (line == 0) return what;
    std::string out = "line " + std::to_string(line);
    if (column != 0) out += ", column " + std::to_string(column);
    return out + ": " + what;
  }

  std::size_t line_;
  std::size_t column_;
};

}  // namespace lrdlsr
