#pragma once

#include "certiscope/kernel_ops.hpp"

#include <vector>

namespace certiscope {

/// Constraints n_k^T p = b_k for k < n_eq and n_k^T p <= b_k otherwise.
struct LinearConstraints {
  Mat normals;
  Vec rhs;
  int n_eq = 0;
};

struct ActiveConstraint {
  int index;
  double orientation;  ///< +1, or -1 for an equality approached from below
  double multiplier;
};

struct MinNormQpResult {
  Vec p;
  std::vector<ActiveConstraint> active;
  int pivots = 0;
  bool warm_start_accepted = false;
};

/// min 1/2 ||p||^2 under the constraints, by a dual active-set method.
///
/// A warm working set is accepted when its least-norm point is primal feasible
/// and its multipliers have the right signs; otherwise the method starts from p = 0.
/// Throws InfeasibleError, IterationLimitError or RankDeficiencyError.
MinNormQpResult min_norm_qp(const LinearConstraints& cons, const std::vector<int>& warm_active,
                            int max_pivots, double feas_tol = 1e-11);

}  // namespace certiscope
