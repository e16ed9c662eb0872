#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gradhom {

/// Bad input: configuration, preconditions, shapes.  Maps to exit code 2.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Any numerical failure inside a solve.  Maps to exit code 3.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonPositiveJacobian : SolverError {
  using SolverError::SolverError;
};

struct SingularMatrix : SolverError {
  using SolverError::SolverError;
};

struct RankDeficient : SolverError {
  using SolverError::SolverError;
};

struct NonConvergence : SolverError {
  NonConvergence(const std::string& what, std::vector<double> history)
      : SolverError(what), residuals(std::move(history)) {}
  std::vector<double> residuals;
};

}  // namespace gradhom
