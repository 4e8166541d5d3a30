#pragma once

#include <stdexcept>
#include <string>

namespace spsfg {

/// Base for every error the toolkit raises. `kind()` is the machine-readable
/// tag the CLI puts into its error JSON.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

/// Argument outside the mathematical or physical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain_error"; }
};

/// Invalid or incomplete configuration / data structure.
class ValidationError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "validation_error"; }
};

/// Root bracketing or convergence failure.
class SolverError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "solver_error"; }
};

/// Spectral weight escaping an integration grid.
class CoverageError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "coverage_error"; }
  CoverageError(const std::string& what, double escaped_fraction)
      : Error(what), escaped_fraction_(escaped_fraction) {}
  double escaped_fraction() const noexcept { return escaped_fraction_; }

 private:
  double escaped_fraction_ = 0.0;
};

/// Not enough events to form an estimator.
class StatisticsError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "statistics_error"; }
};

}  // namespace spsfg
