#pragma once

#include <stdexcept>
#include <string>

namespace igabem {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter fell outside the parametric domain of a curve.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid model data: knots, control points, material, boundary conditions.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Text-level failure while reading a model file. Carries the 1-based line.
class ParseError : public ModelError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : ModelError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Knot insertion would exceed the admissible multiplicity, or similar.
class RefinementError : public Error {
 public:
  using Error::Error;
};

/// Degenerate geometry (zero tangent, coincident points, bad orientation).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// A kernel was evaluated with coincident source and field points.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Unsupported quadrature order or other configuration problem.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Failure of the linear solve (rank deficiency, large residual).
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace igabem
