#include "certiscope/abstract_lasso.hpp"
#include "certiscope/active_set_qp.hpp"
#include "certiscope/errors.hpp"
#include "certiscope/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace certiscope {

CertificateReport make_certificate_report(const Mat& op, Vec p) {
  CertificateReport rep;
  rep.eta = op.transpose() * p;
  rep.norm_p = p.norm();
  rep.p = std::move(p);
  rep.max_abs = rep.eta.size() ? rep.eta.cwiseAbs().maxCoeff() : 0.0;
  std::vector<SignedEntry> sat;
  for (Eigen::Index k = 0; k < rep.eta.size(); ++k)
    if (std::abs(rep.eta(k)) >= 1.0 - kSatTol) sat.push_back({static_cast<int>(k), rep.eta(k) > 0 ? 1 : -1});
  rep.saturation = SignedSupport(std::move(sat));
  rep.valid = true;
  return rep;
}

CertificateReport fuchs_precertificate(const Mat& op, const SignedSupport& support) {
  if (support.empty()) {
    CertificateReport rep = make_certificate_report(op, Vec::Zero(op.rows()));
    rep.valid = true;
    return rep;
  }
  GramSolver solver(select_columns(op, support.indices()));
  CertificateReport rep = make_certificate_report(op, solver.least_norm(support.signs()));
  double off = 0.0;
  for (Eigen::Index k = 0; k < rep.eta.size(); ++k)
    if (!support.contains(static_cast<int>(k))) off = std::max(off, std::abs(rep.eta(k)));
  rep.valid = off < 1.0 - kSatTol;
  return rep;
}

CertificateReport minimal_norm_certificate(const Mat& op, const Vec& a0, const MinNormOptions& opts) {
  SignedSupport I = SignedSupport::of(a0);
  const Eigen::Index P = op.cols();
  std::vector<int> off_cols;
  for (Eigen::Index k = 0; k < P; ++k)
    if (!I.contains(static_cast<int>(k))) off_cols.push_back(static_cast<int>(k));

  LinearConstraints cons;
  cons.n_eq = static_cast<int>(I.size());
  Eigen::Index m = cons.n_eq + 2 * static_cast<Eigen::Index>(off_cols.size());
  cons.normals.resize(op.rows(), m);
  cons.rhs.resize(m);
  auto idx = I.indices();
  Vec s = I.signs();
  for (int q = 0; q < cons.n_eq; ++q) {
    cons.normals.col(q) = op.col(idx[q]);
    cons.rhs(q) = s(q);
  }
  // off-support column k gives constraints 2q (+) and 2q+1 (-)
  for (size_t q = 0; q < off_cols.size(); ++q) {
    Eigen::Index base = cons.n_eq + 2 * static_cast<Eigen::Index>(q);
    cons.normals.col(base) = op.col(off_cols[q]);
    cons.normals.col(base + 1) = -op.col(off_cols[q]);
    cons.rhs(base) = 1.0;
    cons.rhs(base + 1) = 1.0;
  }
  std::vector<int> warm;
  if (opts.warm_start) {
    for (const auto& e : opts.warm_start->entries()) {
      if (I.contains(e.index)) continue;
      auto it = std::lower_bound(off_cols.begin(), off_cols.end(), e.index);
      int q = static_cast<int>(it - off_cols.begin());
      warm.push_back(cons.n_eq + 2 * q + (e.sign > 0 ? 0 : 1));
    }
  }
  auto res = min_norm_qp(cons, warm, static_cast<int>(10 * P + 10));
  return make_certificate_report(op, res.p);
}

Vec homotopy_dual_limit(const Mat& op, const Vec& a0, double rel) {
  Vec y0 = op * a0;
  double lmax = (op.transpose() * y0).cwiseAbs().maxCoeff();
  if (lmax == 0.0) return Vec::Zero(op.rows());
  double lambda = rel * lmax;
  SolutionPath path = lasso_homotopy(op, y0, lambda);
  return (y0 - op * path.evaluate(lambda)) / lambda;
}

ExtendedSupportDiagnostics extended_support_check(const Mat& op, const Vec& a0,
                                                  const SignedSupport& candidate) {
  SignedSupport I = SignedSupport::of(a0);
  if (!candidate.includes(I)) throw DomainError("candidate support must contain the signed support of a0");
  auto idx = candidate.indices();
  Vec s = candidate.signs();
  GramSolver solver(select_columns(op, idx));
  ExtendedSupportDiagnostics d;
  d.v = solver.solve_gram(s);
  double vscale = d.v.size() ? d.v.cwiseAbs().maxCoeff() : 0.0;
  d.sign_condition = true;
  for (size_t q = 0; q < idx.size(); ++q) {
    if (I.contains(idx[q])) continue;
    double vq = d.v(static_cast<Eigen::Index>(q));
    if (std::abs(vq) <= 1e-10 * vscale) d.vanishing.push_back(idx[q]);
    else if (!(s(static_cast<Eigen::Index>(q)) * vq < 0.0)) d.sign_condition = false;
  }
  Vec p = solver.least_norm(s);
  Vec eta = op.transpose() * p;
  for (Eigen::Index k = 0; k < eta.size(); ++k)
    if (!candidate.contains(static_cast<int>(k))) d.off_support_max = std::max(d.off_support_max, std::abs(eta(k)));
  d.strict_condition = d.off_support_max < 1.0 - kSatTol;
  d.passes = d.sign_condition && d.strict_condition;
  if (d.passes) d.eta0 = make_certificate_report(op, p);
  return d;
}

LowNoiseResult low_noise_solution(const Mat& op, const Vec& a0, const Vec& w, double lambda) {
  CertificateReport cert = minimal_norm_certificate(op, a0);
  LowNoiseResult out;
  out.extended = cert.saturation;
  ExtendedSupportDiagnostics d = extended_support_check(op, a0, out.extended);
  out.hypothesis_ok = d.vanishing.empty();
  auto idx = out.extended.indices();
  GramSolver solver(select_columns(op, idx));
  Vec aJ = select_entries(a0, idx) + solver.least_squares(w) - lambda * d.v;
  out.a = Vec::Zero(op.cols());
  for (size_t q = 0; q < idx.size(); ++q) out.a(idx[q]) = aJ(static_cast<Eigen::Index>(q));
  LassoProblem pb{op, op * a0 + w, lambda};
  bool signs_ok = true;
  for (size_t q = 0; q < idx.size(); ++q)
    if (!(out.a(idx[q]) * out.extended.entries()[q].sign > 0.0)) signs_ok = false;
  out.kkt_valid = signs_ok && lasso_kkt_residual(pb, out.a, false) <= std::max(1e-6 * lambda, 1e-12);
  return out;
}

const char* to_string(Identifiability verdict) {
  switch (verdict) {
    case Identifiability::Identifiable: return "identifiable";
    case Identifiability::NotASolution: return "not-a-solution";
    default: return "ambiguous";
  }
}

IdentifiabilityResult identifiability_report(const Mat& op, const Vec& a0) {
  if (a0.cwiseAbs().maxCoeff() == 0.0) return {Identifiability::Identifiable, std::nullopt};
  CertificateReport cert;
  try {
    cert = minimal_norm_certificate(op, a0);
  } catch (const InfeasibleError&) {
    return {Identifiability::NotASolution, std::nullopt};
  } catch (const IterationLimitError&) {
    return {Identifiability::Ambiguous, std::nullopt};
  } catch (const RankDeficiencyError&) {
    return {Identifiability::Ambiguous, std::nullopt};
  }
  for (Eigen::Index k = 0; k < cert.eta.size(); ++k)
    if (!cert.saturation.contains(static_cast<int>(k)) && std::abs(cert.eta(k)) >= 1.0 - 1e-6)
      return {Identifiability::Ambiguous, cert};
  try {
    GramSolver rank_probe(select_columns(op, cert.saturation.indices()), 1e-10);
    if (!extended_support_check(op, a0, cert.saturation).passes) return {Identifiability::Ambiguous, cert};
  } catch (const RankDeficiencyError&) {
    return {Identifiability::Ambiguous, cert};
  }
  return {Identifiability::Identifiable, cert};
}

Identifiability identifiability_test(const Mat& op, const Vec& a0) {
  return identifiability_report(op, a0).verdict;
}

}  // namespace certiscope
