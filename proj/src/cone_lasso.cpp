#include "certiscope/cone_lasso.hpp"

#include "certiscope/active_set_qp.hpp"
#include "certiscope/errors.hpp"
#include "certiscope/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace certiscope {

namespace {

double amplitude_scale(const Vec& a) { return std::max(1.0, a.size() ? a.cwiseAbs().maxCoeff() : 0.0); }

// Stacked index set [up cols J_up, down cols P + J_down].
std::vector<int> stacked_indices(const UpDownSupport& s, int P) {
  std::vector<int> idx(s.up.begin(), s.up.end());
  for (int j : s.down) idx.push_back(P + j);
  return idx;
}

bool contains(const std::vector<int>& v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); }

}  // namespace

ConePair hh_map(const Vec& u, const Vec& v, double h) {
  if (!(h > 0.0)) throw DomainError("stepsize must be positive");
  if (u.size() != v.size()) throw DomainError("u and v must have equal length");
  if ((u.size() && u.minCoeff() < 0.0) || (v.size() && v.minCoeff() < 0.0))
    throw DomainError("hh_map needs nonnegative u and v");
  return {u + v, 0.5 * h * (u - v), h};
}

PositivePair hh_inverse(const ConePair& pair) {
  if (!(pair.h > 0.0)) throw DomainError("stepsize must be positive");
  double tol = 1e-12 * amplitude_scale(pair.a);
  for (Eigen::Index i = 0; i < pair.a.size(); ++i)
    if (pair.a(i) < -tol || std::abs(pair.b(i)) > 0.5 * pair.h * pair.a(i) + tol)
      throw DomainError("pair outside the cone at index " + std::to_string(i));
  Vec ratio = (2.0 / pair.h) * pair.b;
  return {(0.5 * (pair.a + ratio)).cwiseMax(0.0), (0.5 * (pair.a - ratio)).cwiseMax(0.0)};
}

Mat assemble_cone_operator(const Mat& opA, const Mat& opB, double h) {
  Mat L(opA.rows(), 2 * opA.cols());
  L << opA + 0.5 * h * opB, opA - 0.5 * h * opB;
  return L;
}

PositivePair split_stacked(const Vec& uv) {
  Eigen::Index P = uv.size() / 2;
  return {uv.head(P), uv.tail(P)};
}

UpDownSupport up_down_support(const PositivePair& x, double tol) {
  UpDownSupport s;
  for (Eigen::Index i = 0; i < x.u.size(); ++i) {
    if (x.u(i) > tol) s.up.push_back(static_cast<int>(i));
    if (x.v(i) > tol) s.down.push_back(static_cast<int>(i));
  }
  return s;
}

ConePair solve_cbp(const Mat& opA, const Mat& opB, const Vec& y, double lambda, double h, double tol) {
  Mat L = assemble_cone_operator(opA, opB, h);
  FistaResult res = solve_positive_lasso_fista({L, y, lambda}, tol);
  PositivePair x = split_stacked(res.a);
  // identical up/down columns: any split is optimal, keep the symmetric one (b = 0)
  for (Eigen::Index i = 0; i < opA.cols(); ++i) {
    if (0.5 * h * opB.col(i).norm() <= 1e-12 * std::max(opA.col(i).norm(), 1e-300)) {
      double m = 0.5 * (x.u(i) + x.v(i));
      x.u(i) = m;
      x.v(i) = m;
    }
  }
  return hh_map(x.u, x.v, h);
}

CbpCertificate make_cbp_certificate(const Mat& opA, const Mat& opB, Vec q, double h) {
  CbpCertificate c;
  c.mu = opA.transpose() * q;
  c.dmu = opB.transpose() * q;
  c.h = h;
  c.q = std::move(q);
  c.max_value = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < c.mu.size(); ++k) {
    double up = c.mu(k) + 0.5 * h * c.dmu(k);
    double down = c.mu(k) - 0.5 * h * c.dmu(k);
    if (up >= 1.0 - kSatTol) c.sat_up.push_back(static_cast<int>(k));
    if (down >= 1.0 - kSatTol) c.sat_down.push_back(static_cast<int>(k));
    c.max_value = std::max(c.max_value, std::max(up, down));
  }
  return c;
}

CbpOptimalityReport cbp_optimality_check(const Mat& opA, const Mat& opB, const Vec& y, double lambda,
                                         const ConePair& pair, double tol) {
  if (!(lambda > 0.0)) throw DomainError("cbp_optimality_check needs lambda > 0");
  CbpOptimalityReport rep;
  Vec resid = y - opA * pair.a - opB * pair.b;
  rep.certificate = make_cbp_certificate(opA, opB, resid / lambda, pair.h);
  const auto& c = rep.certificate;
  const double h = pair.h;
  const double amp_tol = 1e-12 * amplitude_scale(pair.a);

  Vec ratio = (2.0 / h) * pair.b;
  Vec u = 0.5 * (pair.a + ratio), v = 0.5 * (pair.a - ratio);
  Vec up = c.mu + 0.5 * h * c.dmu, down = c.mu - 0.5 * h * c.dmu;

  bool cone_ok = true, max_up = true, max_down = true, eq_up = true, eq_down = true;
  for (Eigen::Index i = 0; i < pair.a.size(); ++i) {
    if (pair.a(i) < -amp_tol || std::abs(pair.b(i)) > 0.5 * h * pair.a(i) + amp_tol) cone_ok = false;
    if (up(i) > 1.0 + tol) max_up = false;
    if (down(i) > 1.0 + tol) max_down = false;
    if (u(i) > amp_tol && std::abs(up(i) - 1.0) > tol) eq_up = false;
    if (v(i) > amp_tol && std::abs(down(i) - 1.0) > tol) eq_down = false;
  }
  Mat AB(opA.rows(), 2 * opA.cols());
  AB << opA, opB;
  rep.lagrange_residual = (AB.transpose() * (lambda * c.q - resid)).cwiseAbs().maxCoeff();

  if (!cone_ok) rep.violations.push_back("cone");
  if (!max_up) rep.violations.push_back("max_up");
  if (!max_down) rep.violations.push_back("max_down");
  if (!eq_up) rep.violations.push_back("saturation_up");
  if (!eq_down) rep.violations.push_back("saturation_down");
  if (rep.lagrange_residual > tol * std::max(1.0, lambda)) rep.violations.push_back("lagrange");
  rep.pass = rep.violations.empty();

  bool strict = true;
  UpDownSupport I;
  for (Eigen::Index i = 0; i < pair.a.size(); ++i) {
    bool ui = u(i) > amp_tol, vi = v(i) > amp_tol;
    if (ui) I.up.push_back(static_cast<int>(i));
    if (vi) I.down.push_back(static_cast<int>(i));
    if (!ui && !vi && std::max(up(i), down(i)) >= 1.0 - kSatTol) strict = false;
    if (vi && !ui && up(i) >= 1.0 - kSatTol) strict = false;
    if (ui && !vi && down(i) >= 1.0 - kSatTol) strict = false;
  }
  rep.strict = strict;
  if (rep.pass && strict) {
    try {
      GramSolver rank_probe(select_columns(assemble_cone_operator(opA, opB, h),
                                           stacked_indices(I, static_cast<int>(pair.a.size()))), 1e-10);
      rep.uniqueness_certified = true;
    } catch (const RankDeficiencyError&) {
      rep.uniqueness_certified = false;
    }
  }
  return rep;
}

CbpBasisPursuitReport cbp_bp_optimality_check(const Mat& opA, const Mat& opB, const Vec& y0,
                                              const ConePair& pair, const Vec& q, double tol) {
  CbpBasisPursuitReport rep;
  const double h = pair.h;
  const double amp_tol = 1e-12 * amplitude_scale(pair.a);
  Vec mu = opA.transpose() * q, dmu = opB.transpose() * q;
  Vec up = mu + 0.5 * h * dmu, down = mu - 0.5 * h * dmu;
  Vec ratio = (2.0 / h) * pair.b;
  Vec u = 0.5 * (pair.a + ratio), v = 0.5 * (pair.a - ratio);

  bool fit = (opA * pair.a + opB * pair.b - y0).norm() <= tol * std::max(1.0, y0.norm());
  bool bounds = up.maxCoeff() <= 1.0 + tol && down.maxCoeff() <= 1.0 + tol;
  bool eq_up = true, eq_down = true, le_down = true;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (u(i) > amp_tol && std::abs(up(i) - 1.0) > tol) eq_up = false;
    if (v(i) > amp_tol && std::abs(down(i) - 1.0) > tol) eq_down = false;
    if (v(i) > amp_tol && down(i) > 1.0 + tol) le_down = false;
  }
  if (!fit) rep.violations.push_back("fit");
  if (!bounds) rep.violations.push_back("bounds");
  if (!eq_up) rep.violations.push_back("saturation_up");
  if (!eq_down) rep.violations.push_back("saturation_down");
  rep.pass_as_printed = fit && bounds && eq_up && le_down;
  rep.pass_symmetric = fit && bounds && eq_up && eq_down;
  rep.disagree = rep.pass_as_printed != rep.pass_symmetric;
  return rep;
}

CbpCertificate cbp_minimal_norm_certificate(const Mat& opA, const Mat& opB, const Vec& a0, const Vec& b0,
                                            double h) {
  PositivePair x0 = hh_inverse({a0, b0, h});
  const int P = static_cast<int>(opA.cols());
  UpDownSupport I = up_down_support(x0, 1e-12 * amplitude_scale(a0));
  Mat L = assemble_cone_operator(opA, opB, h);
  std::vector<int> eq = stacked_indices(I, P);
  std::vector<int> order = eq;
  for (int k = 0; k < 2 * P; ++k)
    if (!contains(eq, k)) order.push_back(k);
  LinearConstraints cons;
  cons.n_eq = static_cast<int>(eq.size());
  cons.normals = select_columns(L, order);
  cons.rhs = Vec::Ones(2 * P);
  auto res = min_norm_qp(cons, {}, 10 * 2 * P + 10);
  return make_cbp_certificate(opA, opB, res.p, h);
}

CbpExtendedSupportDiagnostics cbp_extended_support_check(const Mat& opA, const Mat& opB, const Vec& a0,
                                                         const Vec& b0, double h,
                                                         const UpDownSupport& candidate) {
  PositivePair x0 = hh_inverse({a0, b0, h});
  const int P = static_cast<int>(opA.cols());
  UpDownSupport I = up_down_support(x0, 1e-12 * amplitude_scale(a0));
  for (int i : I.up)
    if (!contains(candidate.up, i)) throw DomainError("candidate J_up must contain I_up");
  for (int i : I.down)
    if (!contains(candidate.down, i)) throw DomainError("candidate J_down must contain I_down");

  Mat L = assemble_cone_operator(opA, opB, h);
  std::vector<int> idx = stacked_indices(candidate, P);
  GramSolver solver(select_columns(L, idx));
  Vec ones = Vec::Ones(static_cast<Eigen::Index>(idx.size()));
  CbpExtendedSupportDiagnostics d;
  d.g = solver.solve_gram(ones);
  double gscale = d.g.size() ? d.g.cwiseAbs().maxCoeff() : 0.0;
  d.sign_condition = true;
  for (size_t q = 0; q < idx.size(); ++q) {
    int k = idx[q];
    bool is_up = k < P;
    int i = is_up ? k : k - P;
    if (contains(is_up ? I.up : I.down, i)) continue;
    double gq = d.g(static_cast<Eigen::Index>(q));
    if (std::abs(gq) <= 1e-10 * gscale) (is_up ? d.vanishing_up : d.vanishing_down).push_back(i);
    else if (!(gq < 0.0)) d.sign_condition = false;
  }
  Vec q0 = solver.least_norm(ones);
  Vec vals = L.transpose() * q0;
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < 2 * P; ++k)
    if (!contains(idx, k)) worst = std::max(worst, vals(k));
  d.off_support_max = worst;
  d.strict_condition = worst < 1.0 - kSatTol;
  d.passes = d.sign_condition && d.strict_condition;
  if (d.passes) d.certificate = make_cbp_certificate(opA, opB, q0, h);
  return d;
}

CbpLowNoiseResult cbp_low_noise_solution(const Mat& opA, const Mat& opB, const Vec& a0, const Vec& b0,
                                         const Vec& w, double lambda, double h) {
  const int P = static_cast<int>(opA.cols());
  CbpCertificate cert = cbp_minimal_norm_certificate(opA, opB, a0, b0, h);
  CbpLowNoiseResult out;
  out.extended = {cert.sat_up, cert.sat_down};
  CbpExtendedSupportDiagnostics d = cbp_extended_support_check(opA, opB, a0, b0, h, out.extended);
  out.hypothesis_ok = d.vanishing_up.empty() && d.vanishing_down.empty();

  PositivePair x0 = hh_inverse({a0, b0, h});
  Vec x(2 * P);
  x << x0.u, x0.v;
  Mat L = assemble_cone_operator(opA, opB, h);
  std::vector<int> idx = stacked_indices(out.extended, P);
  GramSolver solver(select_columns(L, idx));
  Vec xJ = select_entries(x, idx) + solver.least_squares(w) - lambda * d.g;
  for (size_t q = 0; q < idx.size(); ++q) x(idx[q]) = xJ(static_cast<Eigen::Index>(q));

  bool positive = xJ.size() == 0 || xJ.minCoeff() > 0.0;
  Vec u = x.head(P), v = x.tail(P);
  out.pair = {u + v, 0.5 * h * (u - v), h};
  LassoProblem pb{L, opA * a0 + opB * b0 + w, lambda};
  out.kkt_valid = positive && lasso_kkt_residual(pb, x, true) <= std::max(1e-6 * lambda, 1e-12);
  return out;
}

std::vector<RecoveredDirac> recover_measure(const ConePair& pair, double amplitude_tol) {
  std::vector<RecoveredDirac> out;
  for (Eigen::Index i = 0; i < pair.a.size(); ++i) {
    if (pair.a(i) <= amplitude_tol) continue;
    double shift = pair.a(i) > 0.0 ? pair.b(i) / pair.a(i) : 0.0;
    out.push_back({static_cast<int>(i), static_cast<double>(i) * pair.h + shift, pair.a(i)});
  }
  return out;
}

}  // namespace certiscope
