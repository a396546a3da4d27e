#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fmsos {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Invalid argument or broken precondition (dimension mismatch, kappa <= 0, ...).
class DomainError : public Error {
public:
  using Error::Error;
};

class AntipodalError : public DomainError {
public:
  AntipodalError() : DomainError("log map undefined at antipodal points") {}
};

class EmptyInterval : public Error {
public:
  EmptyInterval(double lower, double upper)
      : Error("conditional feasible interval is empty: [" + std::to_string(lower) + ", " +
              std::to_string(upper) + "]"),
        lower_(lower), upper_(upper) {}
  double lower() const { return lower_; }
  double upper() const { return upper_; }

private:
  double lower_;
  double upper_;
};

class NotConverged : public Error {
public:
  using Error::Error;
};

class RejectionBudgetExceeded : public Error {
public:
  using Error::Error;
};

// Unreadable or invalid input data (missing files, bad rows).
class DataError : public Error {
public:
  using Error::Error;
};

// Raised by file readers; carries the 1-based line number where parsing failed.
class ParseError : public DataError {
public:
  ParseError(const std::string& kind, std::size_t line, const std::string& what)
      : DataError(kind + " at line " + std::to_string(line) + ": " + what), kind_(kind), line_(line) {}
  const std::string& kind() const { return kind_; }
  std::size_t line() const { return line_; }

private:
  std::string kind_;
  std::size_t line_;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

} // namespace fmsos
