#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kryreg {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// An explicit O(N^2) structure was requested above the configured cap.
class ResourceLimit : public Error {
 public:
  using Error::Error;
};

/// Cholesky met a non-positive pivot.
class NotPositiveDefinite : public Error {
 public:
  NotPositiveDefinite(const std::string& what, std::ptrdiff_t pivot)
      : Error(what), pivot_(pivot) {}
  std::ptrdiff_t pivot() const noexcept { return pivot_; }

 private:
  std::ptrdiff_t pivot_;
};

/// Incomplete factorization hit a zero pivot it could not repair.
class FactorizationBreakdown : public Error {
 public:
  FactorizationBreakdown(const std::string& what, std::ptrdiff_t row)
      : Error(what), row_(row) {}
  std::ptrdiff_t row() const noexcept { return row_; }

 private:
  std::ptrdiff_t row_;
};

class NumericalBreakdown : public Error {
 public:
  using Error::Error;
};

class PreconditionerFailure : public Error {
 public:
  using Error::Error;
};

class InvalidOperator : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class EmptyDataset : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace kryreg
