#pragma once

#include "certiscope/kernel_ops.hpp"

#include <Eigen/QR>

#include <vector>

namespace certiscope {

/// Column-pivoted QR of a tall block M giving Gram solves, pseudo-inverses
/// and projections without forming M^T M.
class GramSolver {
 public:
  /// Throws RankDeficiencyError when a pivot of R falls below rank_tol relative to the largest.
  explicit GramSolver(const Mat& m, double rank_tol = 1e-12);

  Eigen::Index cols() const { return cols_; }
  /// Ratio of smallest to largest |R_ii|.
  double pivot_ratio() const { return pivot_ratio_; }

  Vec solve_gram(const Vec& rhs) const;   ///< (M^T M)^{-1} rhs
  Mat solve_gram(const Mat& rhs) const;
  Vec least_squares(const Vec& y) const;  ///< M^+ y
  Vec least_norm(const Vec& rhs) const;   ///< M^{+,*} rhs = M (M^T M)^{-1} rhs
  Vec project_out(const Vec& v) const;    ///< (Id - M M^+) v
  Mat project_out(const Mat& v) const;

 private:
  Eigen::ColPivHouseholderQR<Mat> qr_;
  Eigen::Index cols_;
  double pivot_ratio_;
};

/// Columns of m listed by idx.
Mat select_columns(const Mat& m, const std::vector<int>& idx);
Vec select_entries(const Vec& v, const std::vector<int>& idx);

/// Largest eigenvalue of m^T m by power iteration.
double gram_norm_estimate(const Mat& m, int iterations);

}  // namespace certiscope
