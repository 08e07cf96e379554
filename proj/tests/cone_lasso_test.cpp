#include "certiscope/active_set_qp.hpp"
#include "certiscope/cone_lasso.hpp"
#include "certiscope/errors.hpp"
#include "certiscope/linalg.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <Eigen/LU>

using namespace certiscope;
using certiscope::testing::Gen;

namespace {

struct CbpInstance {
  Mat A, B;
  double h;
  Vec a0, b0;
};

// Random abstract instance with positive cells, some saturating one side of the cone.
CbpInstance random_instance(Gen& gen, int rows, int P, int s) {
  CbpInstance in{gen.mat(rows, P), gen.mat(rows, P), gen.uniform(0.2, 0.8), Vec::Zero(P), Vec::Zero(P)};
  for (int i : gen.subset(P, s)) {
    in.a0(i) = gen.uniform(0.5, 1.5);
    int side = gen.integer(0, 2);
    in.b0(i) = side == 0 ? 0.0 : (side == 1 ? 0.5 : -0.5) * in.h * in.a0(i);
  }
  return in;
}

std::vector<int> stacked(const UpDownSupport& s, int P) {
  std::vector<int> out = s.up;
  for (int i : s.down) out.push_back(i + P);
  std::sort(out.begin(), out.end());
  return out;
}

// All (J_up, J_down) containing I whose closed-form certificate passes the sign and strictness tests.
std::vector<UpDownSupport> enumerate_cbp(const CbpInstance& in) {
  const int P = static_cast<int>(in.A.cols());
  Mat L(in.A.rows(), 2 * P);
  L << in.A + 0.5 * in.h * in.B, in.A - 0.5 * in.h * in.B;
  Vec x(2 * P);
  x << 0.5 * (in.a0 + 2.0 * in.b0 / in.h), 0.5 * (in.a0 - 2.0 * in.b0 / in.h);
  std::vector<int> I, free;
  for (int k = 0; k < 2 * P; ++k) (x(k) > 1e-12 ? I : free).push_back(k);
  std::vector<UpDownSupport> out;
  for (long mask = 0; mask < (1L << free.size()); ++mask) {
    std::vector<int> J = I;
    for (size_t f = 0; f < free.size(); ++f)
      if (mask >> f & 1) J.push_back(free[f]);
    std::sort(J.begin(), J.end());
    if (static_cast<Eigen::Index>(J.size()) > L.rows()) continue;
    Mat LJ(L.rows(), static_cast<Eigen::Index>(J.size()));
    for (size_t k = 0; k < J.size(); ++k) LJ.col(static_cast<Eigen::Index>(k)) = L.col(J[k]);
    Eigen::FullPivLU<Mat> lu(LJ.transpose() * LJ);
    if (lu.rank() < LJ.cols()) continue;
    Vec g = lu.solve(Vec::Ones(LJ.cols()));
    bool ok = true;
    for (size_t k = 0; k < J.size() && ok; ++k)
      if (x(J[k]) <= 1e-12) ok = g(static_cast<Eigen::Index>(k)) < 1e-12 * g.cwiseAbs().maxCoeff();
    Vec vals = L.transpose() * (LJ * g);
    for (int k = 0; k < 2 * P && ok; ++k)
      if (!std::binary_search(J.begin(), J.end(), k)) ok = vals(k) < 1.0 - 1e-9;
    if (!ok) continue;
    UpDownSupport s;
    for (int k : J) (k < P ? s.up : s.down).push_back(k < P ? k : k - P);
    out.push_back(s);
  }
  return out;
}

GridOperator ideal_grid(int fc, int P) { return build_grid_operator(ObservationSpace(TorusKernel::ideal(fc)), GridSpec{P}); }

}  // namespace

TEST(HhMap, Examples) {
  Vec one = Vec::Ones(1), zero = Vec::Zero(1);
  ConePair p = hh_map(one, one, 0.1);
  EXPECT_DOUBLE_EQ(p.a(0), 2.0);
  EXPECT_DOUBLE_EQ(p.b(0), 0.0);
  ConePair r = hh_map(one, zero, 0.1);
  EXPECT_DOUBLE_EQ(r.a(0), 1.0);
  EXPECT_DOUBLE_EQ(r.b(0), 0.05);
  EXPECT_THROW(hh_map(-one, zero, 0.1), DomainError);
  EXPECT_THROW(hh_inverse({one, Vec::Constant(1, 0.2), 0.1}), DomainError);
}

TEST(HhMap, RoundTrip) {
  Gen gen(51);
  for (int trial = 0; trial < 100; ++trial) {
    double h = gen.uniform(1e-3, 0.5);
    Vec a(5), b(5);
    for (int i = 0; i < 5; ++i) {
      a(i) = gen.uniform(0.0, 3.0);
      b(i) = gen.uniform(-0.5, 0.5) * h * a(i);
    }
    PositivePair uv = hh_inverse({a, b, h});
    EXPECT_GE(uv.u.minCoeff(), 0.0);
    EXPECT_GE(uv.v.minCoeff(), 0.0);
    ConePair back = hh_map(uv.u, uv.v, h);
    EXPECT_LT((back.a - a).cwiseAbs().maxCoeff(), 1e-14 * std::max(1.0, a.cwiseAbs().maxCoeff()));
    EXPECT_LT((back.b - b).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(ConeOperator, Assembly) {
  Gen gen(52);
  Mat A = gen.mat(4, 3), B = gen.mat(4, 3);
  Mat L = assemble_cone_operator(A, B, 0.2);
  ASSERT_EQ(L.cols(), 6);
  EXPECT_LT((L.col(1) - (A.col(1) + 0.1 * B.col(1))).norm(), 1e-15);
  EXPECT_LT((L.col(4) - (A.col(1) - 0.1 * B.col(1))).norm(), 1e-15);
  // objective of (a, b) equals the positive-LASSO objective of (u, v)
  Vec u = gen.vec(3).cwiseAbs(), v = gen.vec(3).cwiseAbs();
  ConePair p = hh_map(u, v, 0.2);
  Vec uv(6);
  uv << u, v;
  EXPECT_LT((A * p.a + B * p.b - L * uv).norm(), 1e-13);
  EXPECT_NEAR(p.a.sum(), uv.sum(), 1e-14);
}

TEST(SolveCbp, LargeLambdaGivesZero) {
  Gen gen(53);
  CbpInstance in = random_instance(gen, 6, 5, 2);
  Vec y = gen.vec(6);
  Mat L = assemble_cone_operator(in.A, in.B, in.h);
  ConePair p = solve_cbp(in.A, in.B, y, 1.01 * std::max(0.0, (L.transpose() * y).maxCoeff()) + 1e-3, in.h, 1e-12);
  EXPECT_EQ(p.a.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(p.b.cwiseAbs().maxCoeff(), 0.0);
}

TEST(SolveCbp, ZeroDerivativeOperatorKeepsBZero) {
  Gen gen(54);
  Mat A = gen.mat(8, 6), B = Mat::Zero(8, 6);
  Vec a0 = Vec::Zero(6);
  a0(1) = 1.0;
  a0(4) = 0.5;
  Vec y = A * a0;
  ConePair p = solve_cbp(A, B, y, 0.05, 0.1, 1e-12);
  EXPECT_EQ(p.b.cwiseAbs().maxCoeff(), 0.0);
  FistaResult ref = solve_positive_lasso_fista({A, y, 0.05}, 1e-12);
  EXPECT_LT((p.a - ref.a).cwiseAbs().maxCoeff(), 1e-7);
}

TEST(SolveCbp, MatchesPositiveHomotopy) {
  Gen gen(55);
  for (int trial = 0; trial < 5; ++trial) {
    CbpInstance in = random_instance(gen, 8, 6, 2);
    Vec y = in.A * in.a0 + in.B * in.b0 + 0.05 * gen.vec(8);
    Mat L = assemble_cone_operator(in.A, in.B, in.h);
    const double lam = 0.1 * (L.transpose() * y).maxCoeff();
    ConePair f = solve_cbp(in.A, in.B, y, lam, in.h, 1e-12);
    PositivePair x = split_stacked(positive_lasso_homotopy(L, y, lam).evaluate(lam));
    ConePair h = hh_map(x.u, x.v, in.h);
    EXPECT_LT((f.a - h.a).cwiseAbs().maxCoeff(), 1e-5);
    EXPECT_LT((f.b - h.b).cwiseAbs().maxCoeff(), 1e-5);
  }
}

TEST(PositiveHomotopy, Examples) {
  Mat op(3, 1);
  op << 1.0, 2.0, 2.0;
  SolutionPath z = positive_lasso_homotopy(op, Vec::Zero(3), 1e-3);
  EXPECT_EQ(z.evaluate(0.1).norm(), 0.0);
  Vec y(3);
  y << 1.0, 1.0, 0.5;  // correlation 4
  SolutionPath p = positive_lasso_homotopy(op, y, 1e-6);
  EXPECT_NEAR(p.lambda_max, 4.0, 1e-14);
  EXPECT_NEAR(p.evaluate(1.0)(0), 3.0 / 9.0, 1e-14);
  SolutionPath neg = positive_lasso_homotopy(op, -y, 1e-6);
  EXPECT_EQ(neg.evaluate(1e-3).norm(), 0.0);
}

TEST(PositiveHomotopy, DeconvolutionPathAgreesWithFista) {
  GridOperator g = ideal_grid(10, 64);
  const double h = g.grid.h();
  Mat L = assemble_cone_operator(g.phi, g.dphi, h);
  // spikes between grid points
  ObservationSpace space(TorusKernel::ideal(10));
  Vec y = space.column(0.4531) + 0.7 * space.column(0.5512);
  const double lmax = (L.transpose() * y).maxCoeff();
  SolutionPath p = positive_lasso_homotopy(L, y, 1e-3 * lmax);
  bool paired = false;
  for (const auto& seg : p.segments) {
    UpDownSupport s;
    for (int k : seg.support.indices()) (k < 64 ? s.up : s.down).push_back(k % 64);
    for (int i : s.up)
      if (std::count(s.down.begin(), s.down.end(), i + 1) || std::count(s.down.begin(), s.down.end(), i)) paired = true;
  }
  EXPECT_TRUE(paired);
  for (double rel : {0.5, 0.1, 0.02, 0.005}) {
    const double lam = rel * lmax;
    FistaResult f = solve_positive_lasso_fista({L, y, lam}, 1e-11);
    EXPECT_LT((f.a - p.evaluate(lam)).cwiseAbs().maxCoeff(), 1e-5) << rel;
  }
}

TEST(CbpOptimality, Examples) {
  Gen gen(56);
  CbpInstance in = random_instance(gen, 8, 6, 2);
  Vec y = in.A * in.a0 + in.B * in.b0 + 0.05 * gen.vec(8);
  Mat L = assemble_cone_operator(in.A, in.B, in.h);
  const double lmax = (L.transpose() * y).maxCoeff();
  ConePair zero{Vec::Zero(6), Vec::Zero(6), in.h};
  EXPECT_TRUE(cbp_optimality_check(in.A, in.B, y, 1.01 * lmax, zero, 1e-9).pass);

  const double lam = 0.1 * lmax, tol = 1e-10;
  ConePair sol = solve_cbp(in.A, in.B, y, lam, in.h, tol);
  CbpOptimalityReport ok = cbp_optimality_check(in.A, in.B, y, lam, sol, 10 * tol);
  EXPECT_TRUE(ok.pass);
  EXPECT_LE(ok.certificate.max_value, 1.0 + kSatTol);

  ConePair bad = sol;
  int i = 0;
  while (bad.a(i) <= 0.0) ++i;
  bad.a(i) += 0.1;
  CbpOptimalityReport r = cbp_optimality_check(in.A, in.B, y, lam, bad, 10 * tol);
  EXPECT_FALSE(r.pass);
  EXPECT_FALSE(r.violations.empty());
}

TEST(CbpOptimality, BasisPursuitReadingsAgreeOnNoiselessInstance) {
  GridOperator g = ideal_grid(10, 64);
  Vec a0 = Vec::Zero(64), b0 = Vec::Zero(64);
  a0(20) = 1.0;
  CbpCertificate c = cbp_minimal_norm_certificate(g.phi, g.dphi, a0, b0, g.grid.h());
  CbpBasisPursuitReport r =
      cbp_bp_optimality_check(g.phi, g.dphi, g.phi * a0, {a0, b0, g.grid.h()}, c.q, 1e-8);
  EXPECT_TRUE(r.pass_as_printed);
  EXPECT_TRUE(r.pass_symmetric);
  EXPECT_FALSE(r.disagree);
}

TEST(CbpMinimalNorm, SeparatedSpikeIsSupportStable) {
  GridOperator g = ideal_grid(10, 64);
  Vec a0 = Vec::Zero(64), b0 = Vec::Zero(64);
  a0(20) = 1.0;
  CbpCertificate c = cbp_minimal_norm_certificate(g.phi, g.dphi, a0, b0, g.grid.h());
  EXPECT_EQ(c.sat_up, std::vector<int>{20});
  EXPECT_EQ(c.sat_down, std::vector<int>{20});
  CbpExtendedSupportDiagnostics d = cbp_extended_support_check(g.phi, g.dphi, a0, b0, g.grid.h(), {{20}, {20}});
  EXPECT_TRUE(d.passes);
}

TEST(CbpMinimalNorm, ZeroDerivativeReducesToPositiveLasso) {
  Gen gen(57);
  Mat A = gen.mat(6, 10), B = Mat::Zero(6, 10);
  Vec a0 = Vec::Zero(10), b0 = Vec::Zero(10);
  a0(2) = 1.0;
  a0(7) = 0.6;
  CbpCertificate c = cbp_minimal_norm_certificate(A, B, a0, b0, 0.3);
  LinearConstraints cons;
  cons.n_eq = 2;
  cons.normals = Mat(6, 10);
  cons.normals << A.col(2), A.col(7), A.col(0), A.col(1), A.col(3), A.col(4), A.col(5), A.col(6), A.col(8), A.col(9);
  cons.rhs = Vec::Ones(10);
  Vec q = min_norm_qp(cons, {}, 200).p;
  EXPECT_LT((c.q - q).norm(), 1e-9);
  EXPECT_EQ(c.sat_up, c.sat_down);
}

TEST(CbpMinimalNorm, EnumerationMatchesQp) {
  Gen gen(58);
  int checked = 0, attempts = 0;
  while (checked < 20 && attempts < 2000) {
    ++attempts;
    const int P = gen.integer(3, 6);
    CbpInstance in = random_instance(gen, gen.integer(P + 1, 2 * P), P, gen.integer(1, 2));
    CbpCertificate c;
    try {
      c = cbp_minimal_norm_certificate(in.A, in.B, in.a0, in.b0, in.h);
    } catch (const InfeasibleError&) {
      continue;
    }
    UpDownSupport sat{c.sat_up, c.sat_down};
    // the closed form needs the saturated columns to be independent
    Mat L = assemble_cone_operator(in.A, in.B, in.h);
    std::vector<int> J = stacked(sat, P);
    if (static_cast<Eigen::Index>(J.size()) > L.rows()) continue;
    if (Eigen::FullPivLU<Mat>(select_columns(L, J)).rank() < static_cast<Eigen::Index>(J.size())) continue;
    auto passing = enumerate_cbp(in);
    ASSERT_EQ(passing.size(), 1u) << "instance " << checked;
    EXPECT_EQ(passing.front(), sat);
    EXPECT_TRUE(cbp_extended_support_check(in.A, in.B, in.a0, in.b0, in.h, sat).passes);
    ++checked;
  }
  EXPECT_EQ(checked, 20);
}

TEST(CbpLowNoise, ZeroNoiseLimitRecoversInput) {
  GridOperator g = ideal_grid(10, 64);
  Vec a0 = Vec::Zero(64), b0 = Vec::Zero(64);
  a0(20) = 1.0;
  a0(40) = 0.7;
  b0(40) = 0.2 * 0.5 * g.grid.h() * 0.7;
  CbpLowNoiseResult r = cbp_low_noise_solution(g.phi, g.dphi, a0, b0, Vec::Zero(g.phi.rows()), 1e-9, g.grid.h());
  EXPECT_TRUE(r.kkt_valid);
  EXPECT_LT((r.pair.a - a0).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((r.pair.b - b0).cwiseAbs().maxCoeff(), 1e-6 * g.grid.h());
}

TEST(CbpLowNoise, FuchsTypeFormula) {
  Gen gen(59);
  GridOperator g = ideal_grid(10, 64);
  const double h = g.grid.h();
  Vec a0 = Vec::Zero(64), b0 = Vec::Zero(64);
  a0(20) = 1.0;
  Vec w = 1e-5 * gen.vec(g.phi.rows());
  const double lam = 1e-4;
  CbpLowNoiseResult r = cbp_low_noise_solution(g.phi, g.dphi, a0, b0, w, lam, h);
  ASSERT_EQ(r.extended, (UpDownSupport{{20}, {20}}));
  Mat LJ(g.phi.rows(), 2);
  LJ << g.phi.col(20) + 0.5 * h * g.dphi.col(20), g.phi.col(20) - 0.5 * h * g.dphi.col(20);
  Mat G = LJ.transpose() * LJ;
  Vec x = Vec::Constant(2, 0.5) + G.inverse() * (LJ.transpose() * w) - lam * G.inverse() * Vec::Ones(2);
  EXPECT_NEAR(r.pair.a(20), x(0) + x(1), 1e-10);
  EXPECT_NEAR(r.pair.b(20), 0.5 * h * (x(0) - x(1)), 1e-12);
}

TEST(CbpLowNoise, MatchesSolver) {
  Gen gen(60);
  int done = 0, attempts = 0;
  while (done < 5 && attempts < 500) {
    ++attempts;
    CbpInstance in = random_instance(gen, 10, 6, 2);
    Vec w = 1e-5 * gen.vec(10);
    const double lam = 1e-4;
    CbpLowNoiseResult r;
    try {
      r = cbp_low_noise_solution(in.A, in.B, in.a0, in.b0, w, lam, in.h);
    } catch (const std::exception&) {
      continue;
    }
    if (!r.hypothesis_ok || !r.kkt_valid) continue;
    ConePair f = solve_cbp(in.A, in.B, in.A * in.a0 + in.B * in.b0 + w, lam, in.h, 1e-12);
    EXPECT_LT((f.a - r.pair.a).cwiseAbs().maxCoeff(), 1e-7);
    EXPECT_LT((f.b - r.pair.b).cwiseAbs().maxCoeff(), 1e-7);
    ++done;
  }
  EXPECT_EQ(done, 5);
}

TEST(ConeProperty, SolverOutputsStayInCone) {
  Gen gen(61);
  for (int trial = 0; trial < 10; ++trial) {
    CbpInstance in = random_instance(gen, 8, 8, 3);
    Vec y = in.A * in.a0 + in.B * in.b0 + 0.1 * gen.vec(8);
    Mat L = assemble_cone_operator(in.A, in.B, in.h);
    double lmax = (L.transpose() * y).maxCoeff();
    if (!(lmax > 0)) continue;
    ConePair p = solve_cbp(in.A, in.B, y, 0.05 * lmax, in.h, 1e-10);
    EXPECT_GE(p.a.minCoeff(), -1e-12);
    for (int i = 0; i < 8; ++i) EXPECT_LE(std::abs(p.b(i)), 0.5 * in.h * p.a(i) + 1e-12);
    for (const auto& d : recover_measure(p)) {
      EXPECT_GE(d.position, d.grid_index * in.h - 0.5 * in.h - 1e-12);
      EXPECT_LE(d.position, d.grid_index * in.h + 0.5 * in.h + 1e-12);
    }
  }
}

TEST(ConeProperty, RecoverMeasureConvention) {
  ConePair p{Vec::Zero(3), Vec::Zero(3), 0.1};
  p.a(1) = 2.0;
  p.b(1) = 0.05;
  auto d = recover_measure(p);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_NEAR(d[0].position, 0.1 + 0.025, 1e-15);
  EXPECT_DOUBLE_EQ(d[0].amplitude, 2.0);
}

TEST(ConeProperty, DualVectorIsUniqueAcrossSolutions) {
  Gen gen(62);
  Mat A = gen.mat(8, 6), B = Mat::Zero(8, 6);
  Vec y = gen.vec(8);
  const double h = 0.2;
  Mat L = assemble_cone_operator(A, B, h);
  const double lam = 0.1 * (L.transpose() * y).maxCoeff();
  Vec total = positive_lasso_homotopy(A, y, lam).evaluate(lam);
  // every split of u_i + v_i is optimal when B = 0
  PositivePair x{0.5 * total, 0.5 * total}, moved{total, Vec::Zero(6)};
  ConePair p1 = hh_map(x.u, x.v, h), p2 = hh_map(moved.u, moved.v, h);
  Vec q1 = (y - A * p1.a - B * p1.b) / lam, q2 = (y - A * p2.a - B * p2.b) / lam;
  EXPECT_LT((q1 - q2).norm(), 1e-9);
  EXPECT_TRUE(cbp_optimality_check(A, B, y, lam, p2, 1e-8).pass);
}
