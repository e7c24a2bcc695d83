#pragma once

#include <stdexcept>
#include <string>

namespace morley {

// Degenerate or inconsistent geometry (zero-area triangle, bad rectangle, ...).
struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A linear solve failed or its residual check did not pass.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Neumann data with a mean that is too far from zero.
struct CompatibilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Newton did not converge within the iteration budget.
struct StepFailure : std::runtime_error {
  StepFailure(const std::string& msg, int step_, int iters_, double residual_)
      : std::runtime_error(msg), step(step_), iters(iters_), residual(residual_) {}
  int step;
  int iters;
  double residual;
};

// Filesystem trouble while writing output.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace morley
