#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace resonance {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid basis / grid / option combination.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// Vector lengths that do not match the basis.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A pointwise map produced a non-finite value.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// Missing or inconsistent declared metadata on a problem.
class SpecificationError : public Error {
 public:
  using Error::Error;
};

/// Operation requires a simple eigenvalue but the group has several members.
class MultiplicityError : public Error {
 public:
  using Error::Error;
};

/// Case the library deliberately does not treat (complex spectra, multiple
/// eigenvalues in coupled resonance, ...).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Resonant shift with a forcing that has a component on the kernel.
class NonOrthogonalForcing : public Error {
 public:
  NonOrthogonalForcing(std::size_t group, double projection, double tolerance)
      : Error("forcing is not orthogonal to resonant eigenvalue group " + std::to_string(group) +
              " (|<f,phi>| = " + std::to_string(projection) +
              " > tol = " + std::to_string(tolerance) + ")"),
        group_(group),
        projection_(projection),
        tolerance_(tolerance) {}

  std::size_t group() const noexcept { return group_; }
  double projection() const noexcept { return projection_; }
  double tolerance() const noexcept { return tolerance_; }

 private:
  std::size_t group_;
  double projection_;
  double tolerance_;
};

/// Fredholm violation inside a 2x2 block solve.
class ResonantModeNonOrthogonal : public Error {
 public:
  ResonantModeNonOrthogonal(std::size_t mode, std::string component, double projection)
      : Error("resonant mode (basis index " + std::to_string(mode) + ") has non-orthogonal forcing in component " +
              component + " (projection " + std::to_string(projection) + ")"),
        mode_(mode),
        component_(std::move(component)) {}

  std::size_t mode() const noexcept { return mode_; }
  const std::string& component() const noexcept { return component_; }

 private:
  std::size_t mode_;
  std::string component_;
};

/// Malformed or invalid problem file. Carries the 1-based line when known.
class SpecError : public Error {
 public:
  SpecError(const std::string& message, int line = 0, std::string key = {})
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line),
        key_(std::move(key)) {}

  int line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  int line_;
  std::string key_;
};

}  // namespace resonance
