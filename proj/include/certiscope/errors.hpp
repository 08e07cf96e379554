#pragma once

#include <stdexcept>
#include <string>

namespace certiscope {

/// Argument outside the documented domain (derivative order, negative cone input, off-grid spike).
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A Gram matrix that must be inverted is singular to working precision.
struct RankDeficiencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Constraint set of a certificate program is empty.
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Iterative solver or pivoting scheme exhausted its budget.
struct IterationLimitError : std::runtime_error {
  IterationLimitError(const std::string& what, double last_residual)
      : std::runtime_error(what), last_residual(last_residual) {}
  double last_residual;
};

/// Saturation pattern that matches no row of the Dirac-count table.
struct ClassificationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Scaling probe found no grid on which the predicted support appears.
struct ProbeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace certiscope
