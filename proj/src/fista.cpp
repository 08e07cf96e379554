#include "certiscope/abstract_lasso.hpp"
#include "certiscope/errors.hpp"
#include "certiscope/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace certiscope {

namespace {

Vec prox(const Vec& x, double thresh, bool nonnegative) {
  if (nonnegative) return (x.array() - thresh).max(0.0).matrix();
  return (x.array().sign() * (x.array().abs() - thresh).max(0.0)).matrix();
}

double penalty(const Vec& a, bool nonnegative) { return nonnegative ? a.sum() : a.lpNorm<1>(); }

FistaResult run_fista(const LassoProblem& pb, double tol, const FistaOptions& opts, bool nonnegative) {
  if (!(pb.lambda > 0.0)) throw DomainError("FISTA needs lambda > 0");
  const Mat& A = pb.op;
  Eigen::Index P = A.cols();
  // power iteration approaches from below; pad so the step stays admissible
  double L = 1.02 * gram_norm_estimate(A, opts.power_iterations);
  if (L == 0.0) return {Vec::Zero(P), 0.0, 0.0, 0};
  double step = 1.0 / L;
  Mat G = A.transpose() * A;
  Vec aty = A.transpose() * pb.y;

  Vec x = Vec::Zero(P), x_prev = x, z = x;
  double t = 1.0;
  double gap = lasso_duality_gap(pb, x, nonnegative);
  double fp = 0.0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    Vec grad = G * z - aty;
    x_prev = x;
    x = prox(z - step * grad, step * pb.lambda, nonnegative);
    double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    z = x + ((t - 1.0) / t_next) * (x - x_prev);
    t = t_next;
    if (it % opts.restart_every == 0) {
      z = x;
      t = 1.0;
    }
    if (it % opts.check_every == 0) {
      gap = lasso_duality_gap(pb, x, nonnegative);
      Vec gx = G * x - aty;
      fp = (x - prox(x - step * gx, step * pb.lambda, nonnegative)).cwiseAbs().maxCoeff();
      if (gap <= tol && fp <= tol) return {x, gap, fp, it};
    }
  }
  throw IterationLimitError("FISTA did not reach the requested duality gap", gap);
}

}  // namespace

double lasso_duality_gap(const LassoProblem& pb, const Vec& a, bool nonnegative) {
  Vec r = pb.y - pb.op * a;
  Vec c = pb.op.transpose() * r;
  double primal = 0.5 * r.squaredNorm() + pb.lambda * penalty(a, nonnegative);
  double cmax = nonnegative ? (c.size() ? c.maxCoeff() : 0.0) : c.cwiseAbs().maxCoeff();
  double scale = cmax > pb.lambda ? pb.lambda / cmax : 1.0;
  Vec theta = scale * r;
  double dual = 0.5 * pb.y.squaredNorm() - 0.5 * (pb.y - theta).squaredNorm();
  return std::max(primal - dual, 0.0);
}

double lasso_kkt_residual(const LassoProblem& pb, const Vec& a, bool nonnegative) {
  Vec c = pb.op.transpose() * (pb.y - pb.op * a);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    double g;
    if (a(i) > 0.0) g = 1.0;
    else if (a(i) < 0.0) g = nonnegative ? std::numeric_limits<double>::infinity() : -1.0;
    else if (nonnegative) g = std::min(c(i) / pb.lambda, 1.0);
    else g = std::clamp(c(i) / pb.lambda, -1.0, 1.0);
    worst = std::max(worst, std::abs(c(i) - pb.lambda * g));
  }
  return worst;
}

FistaResult solve_lasso_fista(const LassoProblem& problem, double tol, const FistaOptions& opts) {
  return run_fista(problem, tol, opts, false);
}

FistaResult solve_positive_lasso_fista(const LassoProblem& problem, double tol, const FistaOptions& opts) {
  return run_fista(problem, tol, opts, true);
}

}  // namespace certiscope
