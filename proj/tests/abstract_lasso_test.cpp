#include "certiscope/abstract_lasso.hpp"
#include "certiscope/errors.hpp"
#include "certiscope/linalg.hpp"
#include "support_oracle.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace certiscope;
using certiscope::testing::Gen;
using certiscope::testing::enumerate_supports;

namespace {

Mat orthonormal(Gen& gen, int rows, int cols) {
  Eigen::HouseholderQR<Mat> qr(gen.mat(rows, cols));
  return qr.householderQ() * Mat::Identity(rows, cols);
}

Vec soft_threshold(const Vec& a, double t) {
  Vec out(a.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    out(i) = a(i) > t ? a(i) - t : (a(i) < -t ? a(i) + t : 0.0);
  return out;
}

// ||c - lambda g||_inf with g built entry by entry from the subdifferential of ||.||_1.
double explicit_kkt(const Mat& op, const Vec& y, double lambda, const Vec& a) {
  Vec c = op.transpose() * (y - op * a);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    double g = a(i) > 0 ? 1.0 : a(i) < 0 ? -1.0 : std::clamp(c(i) / lambda, -1.0, 1.0);
    worst = std::max(worst, std::abs(c(i) - lambda * g));
  }
  return worst;
}

Vec sparse(Gen& gen, int n, int s) {
  Vec a = Vec::Zero(n);
  for (int i : gen.subset(n, s)) a(i) = gen.sign() * gen.uniform(0.5, 1.5);
  return a;
}

// Two grid spikes of the ideal kernel.
Mat ideal_grid(int fc, int P) { return build_grid_operator(ObservationSpace(TorusKernel::ideal(fc)), GridSpec{P}).phi; }

}  // namespace

TEST(SignedSupport, Basics) {
  SignedSupport s({{1, 1}, {4, -1}});
  EXPECT_EQ(s.indices(), (std::vector<int>{1, 4}));
  EXPECT_EQ(s.sign_at(4), -1);
  EXPECT_EQ(s.sign_at(2), 0);
  EXPECT_TRUE(SignedSupport({{1, 1}, {2, 1}, {4, -1}}).includes(s));
  EXPECT_FALSE(SignedSupport({{1, 1}, {4, 1}}).includes(s));
  EXPECT_THROW(SignedSupport({{1, 1}, {1, -1}}), DomainError);
  EXPECT_THROW(SignedSupport({{1, 2}}), DomainError);
  Vec a(3);
  a << 0.0, -2.0, 1e-3;
  EXPECT_EQ(SignedSupport::of(a, 1e-2), SignedSupport({{1, -1}}));
}

TEST(Fista, LargeLambdaGivesZero) {
  Gen gen(31);
  Mat op = gen.mat(6, 10);
  Vec y = gen.vec(6);
  double lmax = (op.transpose() * y).cwiseAbs().maxCoeff();
  FistaResult r = solve_lasso_fista({op, y, 1.01 * lmax}, 1e-12);
  EXPECT_EQ(r.a.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Fista, OrthonormalIsSoftThreshold) {
  Gen gen(32);
  Mat op = orthonormal(gen, 12, 6);
  Vec a0 = gen.vec(6);
  FistaResult r = solve_lasso_fista({op, op * a0, 0.3}, 1e-12);
  EXPECT_LT((r.a - soft_threshold(a0, 0.3)).cwiseAbs().maxCoeff(), 1e-9);
  FistaResult pos = solve_positive_lasso_fista({op, op * a0, 0.3}, 1e-12);
  EXPECT_LT((pos.a - (a0.array() - 0.3).max(0.0).matrix()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Fista, MatchesHomotopyOnRandomInstance) {
  Gen gen(33);
  Mat op = gen.mat(8, 20);
  Vec y = gen.vec(8);
  double lambda = 0.1 * (op.transpose() * y).cwiseAbs().maxCoeff();
  FistaResult r = solve_lasso_fista({op, y, lambda}, 1e-10);
  Vec h = lasso_homotopy(op, y, lambda).evaluate(lambda);
  EXPECT_LT((r.a - h).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LE(r.gap, 1e-10);
  EXPECT_LE(r.fixed_point_residual, 1e-10);
}

TEST(Fista, IterationLimitCarriesGap) {
  Gen gen(34);
  Mat op = gen.mat(8, 20);
  Vec y = gen.vec(8);
  FistaOptions opts;
  opts.max_iter = 3;
  try {
    solve_lasso_fista({op, y, 1e-3}, 1e-14, opts);
    FAIL() << "expected IterationLimitError";
  } catch (const IterationLimitError& e) {
    EXPECT_GT(e.last_residual, 0.0);
  }
}

TEST(FistaProperty, KktInvariant) {
  Gen gen(35);
  for (int trial = 0; trial < 20; ++trial) {
    Mat op = gen.mat(gen.integer(4, 10), gen.integer(5, 20));
    Vec y = gen.vec(op.rows());
    double lambda = gen.uniform(0.05, 0.8) * (op.transpose() * y).cwiseAbs().maxCoeff();
    const double tol = 1e-9;
    FistaResult r = solve_lasso_fista({op, y, lambda}, tol);
    EXPECT_LE(explicit_kkt(op, y, lambda, r.a), 10 * std::sqrt(tol) * std::max(1.0, lambda));
    EXPECT_NEAR(lasso_kkt_residual({op, y, lambda}, r.a, false), explicit_kkt(op, y, lambda, r.a), 1e-12);
  }
}

TEST(Homotopy, ZeroObservation) {
  Mat op = Mat::Identity(3, 3);
  SolutionPath p = lasso_homotopy(op, Vec::Zero(3), 1e-3);
  ASSERT_EQ(p.segments.size(), 1u);
  EXPECT_EQ(p.evaluate(0.5).norm(), 0.0);
  EXPECT_THROW(lasso_homotopy(op, Vec::Zero(3), 0.0), DomainError);
}

TEST(Homotopy, SingleColumn) {
  Mat op(3, 1);
  op << 1.0, 2.0, 2.0;
  Vec y(3);
  y << -1.0, -1.0, 0.5;
  SolutionPath p = lasso_homotopy(op, y, 1e-6);
  const double c = op.col(0).dot(y);  // -2
  EXPECT_NEAR(p.lambda_max, std::abs(c), 1e-14);
  ASSERT_EQ(p.segments.size(), 1u);
  EXPECT_NEAR(p.segments[0].slope(0), 1.0 / 9.0, 1e-14);  // -sign(c) / ||col||^2
  EXPECT_NEAR(p.evaluate(1.0)(0), (c + 1.0) / 9.0, 1e-14);
}

TEST(Homotopy, TiesBrokenBySmallestIndex) {
  Mat op(2, 3);
  op << 1, 1, 0, 0, 0, 1;
  Vec y(2);
  y << 1.0, 0.2;
  SolutionPath p = lasso_homotopy(op, y, 1e-3);
  ASSERT_FALSE(p.ties.empty());
  EXPECT_EQ(p.ties.front().indices, (std::vector<int>{0, 1}));
  EXPECT_EQ(p.segments.front().support.indices(), (std::vector<int>{0}));
}

TEST(Homotopy, EndpointMatchesFista) {
  Gen gen(36);
  Mat op = gen.mat(10, 30);
  Vec y = gen.vec(10);
  SolutionPath p = lasso_homotopy(op, y, 1e-6 * (op.transpose() * y).cwiseAbs().maxCoeff());
  const double lam = p.breakpoints.back();
  FistaOptions opts;
  opts.max_iter = 10'000'000;  // the active block is square here
  FistaResult r = solve_lasso_fista({op, y, lam}, 1e-10, opts);
  EXPECT_LT((r.a - p.evaluate(lam)).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(HomotopyProperty, SegmentsSatisfyKktAndContinuity) {
  Gen gen(37);
  for (int trial = 0; trial < 20; ++trial) {
    const bool nonneg = trial % 2;
    Mat op = gen.mat(gen.integer(4, 10), gen.integer(5, 25));
    Vec y = gen.vec(op.rows());
    double lmax = nonneg ? (op.transpose() * y).maxCoeff() : (op.transpose() * y).cwiseAbs().maxCoeff();
    if (!(lmax > 0)) continue;
    SolutionPath p = nonneg ? positive_lasso_homotopy(op, y, 1e-4 * lmax) : lasso_homotopy(op, y, 1e-4 * lmax);
    EXPECT_NEAR(p.lambda_max, lmax, 1e-12 * lmax);
    for (size_t k = 0; k < p.segments.size(); ++k) {
      const PathSegment& s = p.segments[k];
      double mid = 0.5 * (s.lambda_hi + s.lambda_lo);
      Vec a = s.at(mid);
      EXPECT_LE(lasso_kkt_residual({op, y, mid}, a, nonneg), 1e-8 * std::max(1.0, lmax)) << trial << " seg " << k;
      if (nonneg) EXPECT_GE(a.minCoeff(), -1e-12);
      if (k + 1 < p.segments.size()) {
        Vec l = s.at(s.lambda_lo), r = p.segments[k + 1].at(s.lambda_lo);
        EXPECT_LT((l - r).cwiseAbs().maxCoeff(), 1e-9 * std::max(1.0, l.cwiseAbs().maxCoeff()));
      }
    }
  }
}

TEST(HomotopyProperty, ScalingCovariance) {
  Gen gen(38);
  for (int trial = 0; trial < 10; ++trial) {
    Mat op = gen.mat(6, 12);
    Vec y = gen.vec(6);
    double c = gen.uniform(0.1, 10.0);
    double lmax = (op.transpose() * y).cwiseAbs().maxCoeff();
    SolutionPath p = lasso_homotopy(op, y, 1e-3 * lmax), q = lasso_homotopy(op, c * y, 1e-3 * c * lmax);
    ASSERT_EQ(p.segments.size(), q.segments.size());
    for (size_t k = 0; k < p.breakpoints.size(); ++k)
      EXPECT_NEAR(q.breakpoints[k], c * p.breakpoints[k], 1e-10 * c * lmax);
    for (size_t k = 0; k < p.segments.size(); ++k) {
      EXPECT_LT((q.segments[k].offset - c * p.segments[k].offset).cwiseAbs().maxCoeff(), 1e-8 * c);
      EXPECT_LT((q.segments[k].slope - p.segments[k].slope).cwiseAbs().maxCoeff(), 1e-8);
    }
  }
}

TEST(HomotopyProperty, FistaAgreesAlongPath) {
  Gen gen(39);
  for (int trial = 0; trial < 20; ++trial) {
    const bool nonneg = trial % 2;
    Mat op = gen.mat(8, 16);
    Vec y = gen.vec(8);
    double lmax = nonneg ? (op.transpose() * y).maxCoeff() : (op.transpose() * y).cwiseAbs().maxCoeff();
    if (!(lmax > 0)) continue;
    double lam = lmax * std::pow(10.0, -gen.uniform(0.1, 2.0));
    SolutionPath p = nonneg ? positive_lasso_homotopy(op, y, lam) : lasso_homotopy(op, y, lam);
    LassoProblem pb{op, y, lam};
    FistaResult r = nonneg ? solve_positive_lasso_fista(pb, 1e-10) : solve_lasso_fista(pb, 1e-10);
    EXPECT_LT((r.a - p.evaluate(lam)).cwiseAbs().maxCoeff(), 1e-5);
  }
}

TEST(Fuchs, OrthonormalColumns) {
  Gen gen(40);
  Mat op = orthonormal(gen, 10, 6);
  SignedSupport I({{1, 1}, {3, -1}});
  CertificateReport r = fuchs_precertificate(op, I);
  EXPECT_TRUE(r.valid);
  for (int j = 0; j < 6; ++j) EXPECT_NEAR(r.eta(j), I.sign_at(j), 1e-12);
}

TEST(Fuchs, SingleSpikeHasFlatCertificate) {
  ObservationSpace space(TorusKernel::ideal(10));
  GridSpec grid{64};
  Mat op = build_grid_operator(space, grid).phi;
  CertificateReport r = fuchs_precertificate(op, SignedSupport({{20, 1}}));
  EXPECT_NEAR(space.adjoint_eval(r.p, 1, grid.point(20)), 0.0, 1e-10);
}

TEST(Fuchs, ValidityFromDirectEvaluation) {
  ObservationSpace space(TorusKernel::ideal(10));
  GridSpec grid{64};
  Mat op = build_grid_operator(space, grid).phi;
  SignedSupport I({{30, 1}, {35, 1}});
  CertificateReport r = fuchs_precertificate(op, I);
  Mat AI(op.rows(), 2);
  AI << op.col(30), op.col(35);
  Vec p = AI * (AI.transpose() * AI).inverse() * Vec::Ones(2);
  double off = 0;
  for (int i = 0; i < grid.P; ++i)
    if (i != 30 && i != 35) off = std::max(off, std::abs(space.adjoint_eval(p, 0, grid.point(i))));
  EXPECT_EQ(r.valid, off < 1.0);
  EXPECT_NEAR(r.eta(30), 1.0, 1e-10);
  EXPECT_NEAR(r.eta(35), 1.0, 1e-10);
}

TEST(Fuchs, RankDeficientThrows) {
  Mat op(2, 2);
  op << 1, 1, 0, 0;
  EXPECT_THROW(fuchs_precertificate(op, SignedSupport({{0, 1}, {1, 1}})), RankDeficiencyError);
}

TEST(MinimalNorm, OrthonormalColumns) {
  Gen gen(41);
  Mat op = orthonormal(gen, 10, 6);
  Vec a0 = Vec::Zero(6);
  a0(2) = 2.0;
  a0(4) = -1.0;
  CertificateReport r = minimal_norm_certificate(op, a0);
  Vec expect = op.col(2) - op.col(4);
  EXPECT_LT((r.p - expect).norm(), 1e-10);
  EXPECT_EQ(r.saturation, SignedSupport::of(a0));
}

TEST(MinimalNorm, SingleColumn) {
  Mat op(3, 1);
  op << 1.0, 2.0, 2.0;
  CertificateReport r = minimal_norm_certificate(op, Vec::Ones(1));
  EXPECT_LT((r.p - op.col(0) / 9.0).norm(), 1e-14);
}

TEST(MinimalNorm, CloseSpikesSaturateMore) {
  Mat op = ideal_grid(10, 64);
  Vec a0 = Vec::Zero(64);
  a0(30) = 1.0;
  a0(32) = 1.0;
  CertificateReport r = minimal_norm_certificate(op, a0);
  SignedSupport I = SignedSupport::of(a0);
  EXPECT_GT(r.saturation.size(), I.size());
  EXPECT_TRUE(r.saturation.includes(I));
  SolutionPath path = lasso_homotopy(op, op * a0, 1e-9 * (op.transpose() * op * a0).cwiseAbs().maxCoeff());
  EXPECT_EQ(path.lowest().support, r.saturation);
  Vec pl = homotopy_dual_limit(op, a0, 1e-8);
  EXPECT_LT((pl - r.p).norm(), 1e-5);
}

TEST(MinimalNorm, NotASolutionIsInfeasible) {
  Mat op(2, 3);
  op << 1, 0, 1, 0, 1, 1;
  Vec a0(3);
  a0 << 1, 1, 0;
  EXPECT_THROW(minimal_norm_certificate(op, a0), InfeasibleError);
  EXPECT_EQ(identifiability_test(op, a0), Identifiability::NotASolution);
}

TEST(MinimalNorm, IndependentOfWarmStart) {
  Gen gen(42);
  for (int trial = 0; trial < 20; ++trial) {
    Mat op = gen.mat(8, 14);
    Vec a0 = sparse(gen, 14, 2);
    if (identifiability_test(op, a0) != Identifiability::Identifiable) continue;
    CertificateReport cold = minimal_norm_certificate(op, a0);
    MinNormOptions o;
    o.warm_start = SignedSupport::of(a0);
    CertificateReport warm = minimal_norm_certificate(op, a0, o);
    EXPECT_LT((cold.p - warm.p).norm(), 1e-8);
  }
}

TEST(ExtendedSupport, FuchsValidReducesToFuchs) {
  Mat op = ideal_grid(10, 64);
  Vec a0 = Vec::Zero(64);
  a0(10) = 1.0;
  a0(40) = -1.0;
  SignedSupport I = SignedSupport::of(a0);
  ASSERT_TRUE(fuchs_precertificate(op, I).valid);
  ExtendedSupportDiagnostics d = extended_support_check(op, a0, I);
  EXPECT_TRUE(d.passes);
  ASSERT_TRUE(d.eta0.has_value());
  EXPECT_LT((d.eta0->eta - fuchs_precertificate(op, I).eta).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(ExtendedSupport, FuchsInvalidFailsOffSupport) {
  Mat op = ideal_grid(10, 64);
  Vec a0 = Vec::Zero(64);
  a0(30) = 1.0;
  a0(32) = 1.0;
  SignedSupport I = SignedSupport::of(a0);
  ExtendedSupportDiagnostics d = extended_support_check(op, a0, I);
  EXPECT_FALSE(d.passes);
  EXPECT_FALSE(d.strict_condition);
  // direct evaluation of the off-support correlations
  Mat AI(op.rows(), 2);
  AI << op.col(30), op.col(32);
  Vec eta = op.transpose() * AI * (AI.transpose() * AI).inverse() * Vec::Ones(2);
  eta(30) = eta(32) = 0;
  EXPECT_NEAR(d.off_support_max, eta.cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_GE(d.off_support_max, 1.0);
}

TEST(ExtendedSupport, ExhaustiveScanFindsOneCandidate) {
  Gen gen(43);
  int checked = 0;
  while (checked < 5) {
    Mat op = gen.mat(6, 12);
    Vec a0 = sparse(gen, 12, 2);
    if (identifiability_test(op, a0) != Identifiability::Identifiable) continue;
    CertificateReport r = minimal_norm_certificate(op, a0);
    if (r.saturation.size() > SignedSupport::of(a0).size() + 2) continue;
    auto passing = enumerate_supports(op, a0, 2);
    ASSERT_EQ(passing.size(), 1u);
    EXPECT_EQ(passing.front(), r.saturation);
    EXPECT_TRUE(extended_support_check(op, a0, passing.front()).passes);
    ++checked;
  }
}

TEST(LowNoise, ZeroNoiseLimit) {
  Mat op = ideal_grid(10, 64);
  Vec a0 = Vec::Zero(64);
  a0(30) = 1.0;
  a0(32) = 1.0;
  const double lambda = 1e-6;
  LowNoiseResult r = low_noise_solution(op, a0, Vec::Zero(op.rows()), lambda);
  ASSERT_TRUE(r.hypothesis_ok);
  EXPECT_TRUE(r.kkt_valid);
  EXPECT_EQ(SignedSupport::of(r.a), r.extended);
  ExtendedSupportDiagnostics d = extended_support_check(op, a0, r.extended);
  auto idx = r.extended.indices();
  for (size_t k = 0; k < idx.size(); ++k)
    EXPECT_NEAR(r.a(idx[k]), a0(idx[k]) - lambda * d.v(static_cast<Eigen::Index>(k)), 1e-12);
}

TEST(LowNoise, FuchsFormulaWhenSupportIsStable) {
  Gen gen(44);
  Mat op = ideal_grid(10, 64);
  Vec a0 = Vec::Zero(64);
  a0(10) = 1.0;
  a0(40) = -0.8;
  Vec w = 1e-4 * gen.vec(op.rows());
  const double lambda = 1e-3;
  LowNoiseResult r = low_noise_solution(op, a0, w, lambda);
  SignedSupport I = SignedSupport::of(a0);
  ASSERT_EQ(r.extended, I);
  Mat AI(op.rows(), 2);
  AI << op.col(10), op.col(40);
  Vec s = I.signs();
  Mat G = AI.transpose() * AI;
  Vec aI = Vec(Vec::Zero(2));
  aI << 1.0, -0.8;
  aI += G.inverse() * AI.transpose() * w - lambda * G.inverse() * s;
  EXPECT_NEAR(r.a(10), aI(0), 1e-10);
  EXPECT_NEAR(r.a(40), aI(1), 1e-10);
}

TEST(LowNoise, MatchesFista) {
  Gen gen(45);
  int done = 0;
  while (done < 5) {
    Mat op = gen.mat(10, 20);
    Vec a0 = sparse(gen, 20, 2);
    if (identifiability_test(op, a0) != Identifiability::Identifiable) continue;
    Vec w = 1e-5 * gen.vec(10);
    const double lambda = 1e-4;
    LowNoiseResult r = low_noise_solution(op, a0, w, lambda);
    if (!r.hypothesis_ok || !r.kkt_valid) continue;
    FistaResult f = solve_lasso_fista({op, op * a0 + w, lambda}, 1e-12);
    EXPECT_LT((f.a - r.a).cwiseAbs().maxCoeff(), 1e-7);
    ++done;
  }
}

TEST(Identifiability, Examples) {
  Gen gen(46);
  Mat q = orthonormal(gen, 8, 5);
  EXPECT_EQ(identifiability_test(q, sparse(gen, 5, 3)), Identifiability::Identifiable);
  Mat dup(2, 2);
  dup << 1, 1, 1, 1;
  Vec a0(2);
  a0 << 1, 0;
  EXPECT_EQ(identifiability_test(dup, a0), Identifiability::Ambiguous);
  EXPECT_STREQ(to_string(Identifiability::Ambiguous), "ambiguous");
}

TEST(Identifiability, AgreesWithHomotopyLimit) {
  Gen gen(47);
  for (int trial = 0; trial < 20; ++trial) {
    Mat op = gen.mat(20, 60);
    Vec a0 = sparse(gen, 60, 3 + trial % 6);
    Identifiability v = identifiability_test(op, a0);
    Vec y0 = op * a0;
    SolutionPath p = lasso_homotopy(op, y0, 1e-10 * (op.transpose() * y0).cwiseAbs().maxCoeff());
    const bool limit_is_a0 = (p.lowest().offset - a0).cwiseAbs().maxCoeff() <= 1e-6;
    EXPECT_EQ(v == Identifiability::Identifiable, limit_is_a0) << "trial " << trial;
  }
}

TEST(SupportEnumeration, EnumerationMatchesQpSaturation) {
  Gen gen(48);
  int checked = 0, attempts = 0;
  while (checked < 50 && attempts < 5000) {
    ++attempts;
    // |J| <= rows <= |I| + 3, so the enumeration below is exhaustive
    const int s = gen.integer(1, 3);
    Mat op = gen.mat(gen.integer(s + 1, s + 3), gen.integer(8, 14));
    Vec a0 = sparse(gen, static_cast<int>(op.cols()), s);
    if (identifiability_test(op, a0) != Identifiability::Identifiable) continue;
    CertificateReport r = minimal_norm_certificate(op, a0);
    auto passing = enumerate_supports(op, a0, 3);
    ASSERT_EQ(passing.size(), 1u) << "instance " << checked;
    EXPECT_EQ(passing.front(), r.saturation);
    ++checked;
  }
  EXPECT_EQ(checked, 50);
}

TEST(Fuchs, EmptySupportIsZeroCertificate) {
  Mat op = Mat::Identity(3, 4);
  CertificateReport r = fuchs_precertificate(op, SignedSupport{});
  EXPECT_TRUE(r.valid);
  EXPECT_EQ(r.p.norm(), 0.0);
}
