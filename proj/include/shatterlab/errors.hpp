#pragma once

#include <stdexcept>
#include <string>

namespace shatterlab {

/// Base class for all library errors. The CLI maps each subclass to an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on a value was violated (bad sparsity, negative scale, m >= n, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Operand shapes do not agree.
class DimensionError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// An iterative kernel failed to converge.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, long iterations)
      : Error(what + " (after " + std::to_string(iterations) + " iterations)"),
        iterations_(iterations) {}
  long iterations() const noexcept { return iterations_; }

 private:
  long iterations_;
};

/// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed input text (matrix files, JSON configs). Carries a location.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string location)
      : Error(location.empty() ? what : location + ": " + what), location_(std::move(location)) {}
  const std::string& location() const noexcept { return location_; }

 private:
  std::string location_;
};

}  // namespace shatterlab
