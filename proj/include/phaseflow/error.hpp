#pragma once

#include <stdexcept>
#include <string>

namespace phaseflow {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid input value (negative viscosity, odd mesh level, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Mesh geometry that the discretization cannot handle (obtuse triangle, non-nested meshes).
class GeometryError : public Error {
 public:
  using Error::Error;
};

// Direct solver failure, or a solve whose residual check did not pass.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual = -1.0) : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// Krylov breakdown or iteration limit; callers are expected to fall back to a direct solve.
class IterativeFailure : public SolverError {
 public:
  IterativeFailure(const std::string& what, double residual, int iterations)
      : SolverError(what, residual), iterations_(iterations) {}
  int iterations() const noexcept { return iterations_; }

 private:
  int iterations_;
};

// Newton iteration for the Cahn-Hilliard block did not converge.
class NewtonDivergence : public SolverError {
 public:
  using SolverError::SolverError;
};

// Explicit transport step would violate its CFL bound; the driver shrinks the time step.
class CflViolation : public Error {
 public:
  CflViolation(const std::string& what, double cfl) : Error(what), cfl_(cfl) {}
  double cfl() const noexcept { return cfl_; }

 private:
  double cfl_;
};

// Outer coupling iteration exceeded its budget.
class StepRejected : public Error {
 public:
  using Error::Error;
};

// Configuration file problems. line() is 0 when the error is not tied to a line.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0) : Error(what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace phaseflow
