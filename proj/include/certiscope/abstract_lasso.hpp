#pragma once

#include "certiscope/kernel_ops.hpp"

#include <compare>
#include <optional>
#include <vector>

namespace certiscope {

/// Tolerance for reading |eta| = 1 off a certificate.
inline constexpr double kSatTol = 1e-7;

struct SignedEntry {
  int index;
  int sign;
  auto operator<=>(const SignedEntry&) const = default;
};

/// Index/sign pairs sorted by index with unique indices.
class SignedSupport {
 public:
  SignedSupport() = default;
  /// Throws DomainError on duplicate indices or signs other than +-1.
  explicit SignedSupport(std::vector<SignedEntry> entries);
  /// Nonzero entries of a (|a_i| > tol).
  static SignedSupport of(const Vec& a, double tol = 0.0);

  const std::vector<SignedEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::vector<int> indices() const;
  Vec signs() const;
  bool contains(int index) const;
  /// Sign at index, 0 when absent.
  int sign_at(int index) const;
  /// Entries of this support inside `other` with the same sign.
  bool includes(const SignedSupport& other) const;

  bool operator==(const SignedSupport&) const = default;

 private:
  std::vector<SignedEntry> entries_;
};

struct LassoProblem {
  Mat op;
  Vec y;
  double lambda;
};

struct FistaOptions {
  int max_iter = 200000;
  int restart_every = 200;
  int power_iterations = 50;
  int check_every = 10;
};

struct FistaResult {
  Vec a;
  double gap;
  double fixed_point_residual;
  int iterations;
};

/// Duality gap of a for the LASSO (or its nonnegative variant).
double lasso_duality_gap(const LassoProblem& problem, const Vec& a, bool nonnegative);

/// ||c - lambda g||_inf minimized over subgradients g of the penalty at a, c = Op^*(y - Op a).
double lasso_kkt_residual(const LassoProblem& problem, const Vec& a, bool nonnegative);

/// Accelerated proximal gradient; stops when gap and fixed-point residual are both <= tol.
/// Throws IterationLimitError carrying the last gap.
FistaResult solve_lasso_fista(const LassoProblem& problem, double tol, const FistaOptions& opts = {});
FistaResult solve_positive_lasso_fista(const LassoProblem& problem, double tol,
                                       const FistaOptions& opts = {});

struct PathSegment {
  double lambda_hi;
  double lambda_lo;
  SignedSupport support;
  Vec offset;  ///< a_lambda = offset + lambda * slope on [lambda_lo, lambda_hi]
  Vec slope;
  Vec at(double lambda) const { return offset + lambda * slope; }
};

struct PathTie {
  double lambda;
  std::vector<int> indices;
};

/// Exact piecewise-affine regularization path from lambda_max down to lambda_min.
struct SolutionPath {
  double lambda_max = 0.0;
  bool nonnegative = false;
  std::vector<double> breakpoints;  ///< decreasing; segment k spans [breakpoints[k+1], breakpoints[k]]
  std::vector<PathSegment> segments;
  std::vector<PathTie> ties;
  Eigen::Index dim = 0;

  /// Zero above lambda_max; throws DomainError below the last breakpoint.
  Vec evaluate(double lambda) const;
  const PathSegment& segment_at(double lambda) const;
  const PathSegment& lowest() const { return segments.back(); }
};

SolutionPath lasso_homotopy(const Mat& op, const Vec& y, double lambda_min);
SolutionPath positive_lasso_homotopy(const Mat& op, const Vec& y, double lambda_min);

struct CertificateReport {
  Vec p;
  Vec eta;
  SignedSupport saturation;
  double max_abs = 0.0;
  double norm_p = 0.0;
  /// Fuchs: no saturation off I. Minimal-norm: always true once built.
  bool valid = false;
};

/// eta = Op^* p and its saturation set at kSatTol.
CertificateReport make_certificate_report(const Mat& op, Vec p);

CertificateReport fuchs_precertificate(const Mat& op, const SignedSupport& support);

struct MinNormOptions {
  /// Candidate saturation set tried first; used only if it passes the optimality checks.
  std::optional<SignedSupport> warm_start;
};

/// argmin ||p|| s.t. ||Op^* p||_inf <= 1, Op_I^* p = s_I.
CertificateReport minimal_norm_certificate(const Mat& op, const Vec& a0, const MinNormOptions& opts = {});

/// (y0 - Op a_lambda) / lambda from the homotopy at lambda = rel * lambda_max, y0 = Op a0.
Vec homotopy_dual_limit(const Mat& op, const Vec& a0, double rel = 1e-8);

struct ExtendedSupportDiagnostics {
  bool passes = false;
  bool sign_condition = false;
  bool strict_condition = false;
  Vec v;                          ///< (Op_J^* Op_J)^{-1} s_J
  std::vector<int> vanishing;     ///< j in J \ I with v_j = 0
  double off_support_max = 0.0;   ///< ||Op_{J^c}^* Op_J v_J||_inf
  std::optional<CertificateReport> eta0;
};

ExtendedSupportDiagnostics extended_support_check(const Mat& op, const Vec& a0,
                                                  const SignedSupport& candidate);

struct LowNoiseResult {
  Vec a;
  SignedSupport extended;
  bool hypothesis_ok = false;  ///< every v_j nonzero on J \ I
  bool kkt_valid = false;
};

LowNoiseResult low_noise_solution(const Mat& op, const Vec& a0, const Vec& w, double lambda);

enum class Identifiability { Identifiable, NotASolution, Ambiguous };

const char* to_string(Identifiability verdict);

struct IdentifiabilityResult {
  Identifiability verdict;
  std::optional<CertificateReport> certificate;
};

IdentifiabilityResult identifiability_report(const Mat& op, const Vec& a0);
Identifiability identifiability_test(const Mat& op, const Vec& a0);

}  // namespace certiscope
