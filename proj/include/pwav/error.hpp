#pragma once

#include <stdexcept>
#include <string>

namespace pwav {

/// Error categories, each mapped onto a distinct CLI exit code.
enum class ErrorKind { Config, Data, Numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  int exit_code() const noexcept {
    switch (kind_) {
      case ErrorKind::Config: return 2;
      case ErrorKind::Data: return 3;
      case ErrorKind::Numerical: return 4;
    }
    return 1;
  }

 private:
  ErrorKind kind_;
};

/// Invalid parameters or configuration (preconditions violated before any
/// computation starts).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorKind::Config, what) {}
};

/// Malformed or inconsistent input data.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

/// A computation that cannot produce a meaningful number.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorKind::Numerical, what) {}
};

/// CSV parse failure carrying the offending line number.
class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// (a, b) lies outside the valid time-scale triangle.
class RegionError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Coherence requested where a diagonal spectrum entry is not positive.
class UndefinedCoherenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A dyadic segment produced a singular (non positive definite) matrix.
class DegenerateSegmentError : public NumericalError {
 public:
  DegenerateSegmentError(std::size_t segment, const std::string& what)
      : NumericalError("segment " + std::to_string(segment) + ": " + what),
        segment_(segment) {}
  std::size_t segment() const noexcept { return segment_; }

 private:
  std::size_t segment_;
};

}  // namespace pwav
