#include "certiscope/linalg.hpp"

#include "certiscope/errors.hpp"

#include <cmath>
#include <string>

namespace certiscope {

GramSolver::GramSolver(const Mat& m, double rank_tol) : cols_(m.cols()), pivot_ratio_(1.0) {
  if (cols_ == 0) return;
  if (m.rows() < cols_)
    throw RankDeficiencyError("block of " + std::to_string(cols_) + " columns in dimension " +
                              std::to_string(m.rows()) + " cannot have full column rank");
  qr_.compute(m);
  const auto& r = qr_.matrixQR();
  double top = std::abs(r(0, 0));
  double bottom = std::abs(r(cols_ - 1, cols_ - 1));
  pivot_ratio_ = top > 0.0 ? bottom / top : 0.0;
  if (!(pivot_ratio_ > rank_tol))
    throw RankDeficiencyError("Gram matrix singular: pivot ratio " + std::to_string(pivot_ratio_));
}

Vec GramSolver::solve_gram(const Vec& rhs) const {
  if (cols_ == 0) return Vec(0);
  const auto r_block = qr_.matrixQR().topLeftCorner(cols_, cols_);
  Vec z = qr_.colsPermutation().transpose() * rhs;
  r_block.transpose().triangularView<Eigen::Lower>().solveInPlace(z);
  r_block.triangularView<Eigen::Upper>().solveInPlace(z);
  return qr_.colsPermutation() * z;
}

Mat GramSolver::solve_gram(const Mat& rhs) const {
  Mat out(cols_, rhs.cols());
  for (Eigen::Index j = 0; j < rhs.cols(); ++j) out.col(j) = solve_gram(Vec(rhs.col(j)));
  return out;
}

Vec GramSolver::least_squares(const Vec& y) const {
  if (cols_ == 0) return Vec(0);
  return qr_.solve(y);
}

Vec GramSolver::least_norm(const Vec& rhs) const {
  // M P = Q R gives M (M^T M)^{-1} b = Q [R^{-T} P^T b; 0]
  Eigen::Index rows = qr_.matrixQR().rows();
  if (cols_ == 0) return Vec::Zero(rows);
  const auto r_block = qr_.matrixQR().topLeftCorner(cols_, cols_);
  Vec z = qr_.colsPermutation().transpose() * rhs;
  r_block.transpose().triangularView<Eigen::Lower>().solveInPlace(z);
  Vec full = Vec::Zero(rows);
  full.head(cols_) = z;
  return qr_.householderQ() * full;
}

Vec GramSolver::project_out(const Vec& v) const {
  if (cols_ == 0) return v;
  Vec c = qr_.householderQ().transpose() * v;
  c.head(cols_).setZero();
  return qr_.householderQ() * c;
}

Mat GramSolver::project_out(const Mat& v) const {
  Mat out(v.rows(), v.cols());
  for (Eigen::Index j = 0; j < v.cols(); ++j) out.col(j) = project_out(Vec(v.col(j)));
  return out;
}

Mat select_columns(const Mat& m, const std::vector<int>& idx) {
  Mat out(m.rows(), static_cast<Eigen::Index>(idx.size()));
  for (size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = m.col(idx[j]);
  return out;
}

Vec select_entries(const Vec& v, const std::vector<int>& idx) {
  Vec out(static_cast<Eigen::Index>(idx.size()));
  for (size_t j = 0; j < idx.size(); ++j) out(static_cast<Eigen::Index>(j)) = v(idx[j]);
  return out;
}

double gram_norm_estimate(const Mat& m, int iterations) {
  if (m.cols() == 0) return 0.0;
  // irregular start so circulant Grams do not hide their top mode
  Vec x(m.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = 1.0 + std::sin(1.618034 * (i + 1) * (i + 1));
  x.normalize();
  double est = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vec y = m.transpose() * (m * x);
    double n = y.norm();
    if (n == 0.0) return 0.0;
    est = n;
    x = y / n;
  }
  return est;
}

}  // namespace certiscope
