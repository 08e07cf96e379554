#pragma once

#include "certiscope/abstract_lasso.hpp"

#include <Eigen/LU>

#include <functional>
#include <vector>

namespace certiscope::testing {

/// True when J (with signs) satisfies the closed-form conditions of the extended
/// support: v = (A_J^T A_J)^{-1} s_J, s_j = -sign v_j (or v_j = 0) off I, and
/// |A_{J^c}^T A_J v| < 1 strictly.
inline bool closed_form_conditions(const Mat& op, const SignedSupport& I, const SignedSupport& J) {
  const auto idx = J.indices();
  Mat AJ(op.rows(), static_cast<Eigen::Index>(idx.size()));
  for (size_t k = 0; k < idx.size(); ++k) AJ.col(static_cast<Eigen::Index>(k)) = op.col(idx[k]);
  Eigen::FullPivLU<Mat> lu(AJ.transpose() * AJ);
  if (lu.rank() < AJ.cols()) return false;
  Vec v = lu.solve(J.signs());
  const double vscale = v.cwiseAbs().maxCoeff();
  for (size_t k = 0; k < idx.size(); ++k) {
    if (I.contains(idx[k])) continue;
    double vk = v(static_cast<Eigen::Index>(k));
    if (std::abs(vk) <= 1e-12 * vscale) continue;
    if (J.sign_at(idx[k]) != (vk > 0 ? -1 : 1)) return false;
  }
  Vec eta = op.transpose() * (AJ * v);
  for (Eigen::Index j = 0; j < op.cols(); ++j)
    if (!J.contains(static_cast<int>(j)) && std::abs(eta(j)) >= 1.0 - 1e-9) return false;
  return true;
}

/// Every signed superset J of the support of a0 with |J| <= |I| + extra that passes.
inline std::vector<SignedSupport> enumerate_supports(const Mat& op, const Vec& a0, int extra) {
  SignedSupport I = SignedSupport::of(a0);
  std::vector<int> outside;
  for (Eigen::Index j = 0; j < op.cols(); ++j)
    if (!I.contains(static_cast<int>(j))) outside.push_back(static_cast<int>(j));
  std::vector<SignedSupport> passing;
  std::vector<SignedEntry> chosen;
  std::function<void(size_t, int)> rec = [&](size_t start, int left) {
    std::vector<SignedEntry> all = I.entries();
    all.insert(all.end(), chosen.begin(), chosen.end());
    std::sort(all.begin(), all.end());
    SignedSupport J(all);
    if (closed_form_conditions(op, I, J)) passing.push_back(J);
    if (left == 0) return;
    for (size_t k = start; k < outside.size(); ++k)
      for (int s : {1, -1}) {
        chosen.push_back({outside[k], s});
        rec(k + 1, left - 1);
        chosen.pop_back();
      }
  };
  rec(0, extra);
  return passing;
}

}  // namespace certiscope::testing
