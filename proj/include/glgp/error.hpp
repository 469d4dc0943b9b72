#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace glgp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: wrong shapes, out-of-range arguments, inconsistent data.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input. Carries the 1-based line number of the offending row.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Search or command configuration that cannot be used.
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A numerical routine failed (factorization, eigensolver, near-singular extension).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Eigensolver non-convergence.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, int iterations)
      : NumericalError(what + " after " + std::to_string(iterations) + " iterations"),
        iterations_(iterations) {}
  int iterations() const noexcept { return iterations_; }

 private:
  int iterations_;
};

/// Covariance plus noise could not be factored even with the maximum jitter.
class IllConditionedError : public NumericalError {
 public:
  IllConditionedError(const std::string& what, double min_eigenvalue)
      : NumericalError(what + " (smallest eigenvalue estimate " + std::to_string(min_eigenvalue) + ")"),
        min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

}  // namespace glgp
