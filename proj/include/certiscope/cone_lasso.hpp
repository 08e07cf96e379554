#pragma once

#include "certiscope/abstract_lasso.hpp"

#include <optional>
#include <string>
#include <vector>

namespace certiscope {

/// (a, b) with |b_i| <= (h/2) a_i.
struct ConePair {
  Vec a;
  Vec b;
  double h;
};

/// Nonnegative coordinates of the positive-LASSO reparametrization.
struct PositivePair {
  Vec u;
  Vec v;
};

/// a = u + v, b = (h/2)(u - v). Throws DomainError on negative input.
ConePair hh_map(const Vec& u, const Vec& v, double h);
/// u = (a + 2b/h)/2, v = (a - 2b/h)/2. Throws DomainError outside the cone.
PositivePair hh_inverse(const ConePair& pair);

/// Lambda = [A + (h/2)B, A - (h/2)B].
Mat assemble_cone_operator(const Mat& opA, const Mat& opB, double h);

/// Splits a stacked (u; v) vector of length 2P.
PositivePair split_stacked(const Vec& uv);

ConePair solve_cbp(const Mat& opA, const Mat& opB, const Vec& y, double lambda, double h, double tol);

struct UpDownSupport {
  std::vector<int> up;
  std::vector<int> down;
  bool operator==(const UpDownSupport&) const = default;
};

/// Indices with u_i > tol and v_i > tol.
UpDownSupport up_down_support(const PositivePair& x, double tol = 0.0);

/// Dual vector q with grid values of A^* q and B^* q.
struct CbpCertificate {
  Vec q;
  Vec mu;   ///< A^* q
  Vec dmu;  ///< B^* q
  double h = 0.0;
  std::vector<int> sat_up;    ///< mu + (h/2) dmu >= 1 - kSatTol
  std::vector<int> sat_down;  ///< mu - (h/2) dmu >= 1 - kSatTol
  double max_value = 0.0;     ///< max_k mu_k + (h/2)|dmu_k|
};

CbpCertificate make_cbp_certificate(const Mat& opA, const Mat& opB, Vec q, double h);

struct CbpOptimalityReport {
  CbpCertificate certificate;
  bool pass = false;
  std::vector<std::string> violations;
  double lagrange_residual = 0.0;
  bool strict = false;            ///< strict inequalities off the saturations
  bool uniqueness_certified = false;
};

/// Optimality of (a, b) for the cone LASSO at lambda > 0 through q = (y - Aa - Bb)/lambda.
CbpOptimalityReport cbp_optimality_check(const Mat& opA, const Mat& opB, const Vec& y, double lambda,
                                         const ConePair& pair, double tol);

struct CbpBasisPursuitReport {
  bool pass_as_printed = false;  ///< inequality on the down saturations
  bool pass_symmetric = false;   ///< equality on the down saturations
  bool disagree = false;
  std::vector<std::string> violations;
};

/// lambda = 0 optimality of (a, b) for y0 with candidate dual q, in both printed readings.
CbpBasisPursuitReport cbp_bp_optimality_check(const Mat& opA, const Mat& opB, const Vec& y0,
                                              const ConePair& pair, const Vec& q, double tol);

CbpCertificate cbp_minimal_norm_certificate(const Mat& opA, const Mat& opB, const Vec& a0, const Vec& b0,
                                            double h);

struct CbpExtendedSupportDiagnostics {
  bool passes = false;
  bool sign_condition = false;
  bool strict_condition = false;
  Vec g;  ///< (Lambda_J^* Lambda_J)^{-1} 1; the program multipliers are -g
  std::vector<int> vanishing_up;
  std::vector<int> vanishing_down;
  double off_support_max = 0.0;
  std::optional<CbpCertificate> certificate;
};

/// Closed-form certificate q0 = Lambda_J (Lambda_J^* Lambda_J)^{-1} 1 for a candidate (J_up, J_down).
CbpExtendedSupportDiagnostics cbp_extended_support_check(const Mat& opA, const Mat& opB, const Vec& a0,
                                                         const Vec& b0, double h,
                                                         const UpDownSupport& candidate);

struct CbpLowNoiseResult {
  ConePair pair;
  UpDownSupport extended;
  bool hypothesis_ok = false;
  bool kkt_valid = false;
};

CbpLowNoiseResult cbp_low_noise_solution(const Mat& opA, const Mat& opB, const Vec& a0, const Vec& b0,
                                         const Vec& w, double lambda, double h);

struct RecoveredDirac {
  int grid_index;
  double position;   ///< i h + b_i / a_i
  double amplitude;  ///< a_i
};

/// Diracs of the active cells; b/a taken as 0 when a = 0.
std::vector<RecoveredDirac> recover_measure(const ConePair& pair, double amplitude_tol = 0.0);

}  // namespace certiscope
