#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace otecon {

/// Base class for failures raised by the solvers (as opposed to misuse of
/// the API, which throws std::invalid_argument).
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// Iteration cap reached before the convergence criterion was met.
class NonConvergence : public SolverError {
 public:
  NonConvergence(const std::string& what, int iterations, double residual)
      : SolverError(what), iterations(iterations), residual(residual) {}
  int iterations;
  double residual;
};

/// Naive (non log-domain) matrix scaling over- or underflowed; the caller
/// should retry with log_domain enabled.
class NaiveOverflow : public SolverError {
 public:
  explicit NaiveOverflow(const std::string& what) : SolverError(what) {}
};

/// A design/basis is rank deficient. `combination` holds coefficients of a
/// null-space vector over the offending columns.
class DegenerateDesign : public SolverError {
 public:
  DegenerateDesign(const std::string& what, std::vector<double> combination)
      : SolverError(what), combination(std::move(combination)) {}
  std::vector<double> combination;
};

/// The two marginal laws admit no martingale coupling (convex order fails).
class NoMartingaleCoupling : public SolverError {
 public:
  explicit NoMartingaleCoupling(const std::string& what) : SolverError(what) {}
};

/// A one-dimensional coordinate update could not be solved.
class RootFindingError : public SolverError {
 public:
  RootFindingError(const std::string& what, int coordinate)
      : SolverError(what), coordinate(coordinate) {}
  int coordinate;
};

}  // namespace otecon
