#include "certiscope/active_set_qp.hpp"

#include "certiscope/errors.hpp"
#include "certiscope/linalg.hpp"

#include <cmath>
#include <limits>
#include <optional>

namespace certiscope {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Mat oriented_normals(const LinearConstraints& cons, const std::vector<ActiveConstraint>& active) {
  Mat n(cons.normals.rows(), static_cast<Eigen::Index>(active.size()));
  for (size_t j = 0; j < active.size(); ++j)
    n.col(static_cast<Eigen::Index>(j)) = active[j].orientation * cons.normals.col(active[j].index);
  return n;
}

Vec oriented_rhs(const LinearConstraints& cons, const std::vector<ActiveConstraint>& active) {
  Vec b(static_cast<Eigen::Index>(active.size()));
  for (size_t j = 0; j < active.size(); ++j)
    b(static_cast<Eigen::Index>(j)) = active[j].orientation * cons.rhs(active[j].index);
  return b;
}

double max_violation(const LinearConstraints& cons, const Vec& p, const std::vector<bool>& skip,
                     int& argmax) {
  Vec lhs = cons.normals.transpose() * p;
  double worst = -kInf;
  argmax = -1;
  for (Eigen::Index k = cons.n_eq; k < cons.normals.cols(); ++k) {
    if (skip[k]) continue;
    double v = lhs(k) - cons.rhs(k);
    if (v > worst) {
      worst = v;
      argmax = static_cast<int>(k);
    }
  }
  return worst;
}

// Least-norm point of a working set; accepted when primal and dual feasible.
std::optional<MinNormQpResult> try_working_set(const LinearConstraints& cons,
                                               const std::vector<int>& warm, double feas_tol) {
  std::vector<ActiveConstraint> active;
  std::vector<bool> in_set(cons.normals.cols(), false);
  for (int k = 0; k < cons.n_eq; ++k) {
    active.push_back({k, 1.0, 0.0});
    in_set[k] = true;
  }
  for (int k : warm) {
    if (k < cons.n_eq || in_set[k]) continue;
    active.push_back({k, 1.0, 0.0});
    in_set[k] = true;
  }
  try {
    GramSolver solver(oriented_normals(cons, active));
    Vec b = oriented_rhs(cons, active);
    Vec g = solver.solve_gram(b);
    double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
    for (size_t j = 0; j < active.size(); ++j) {
      active[j].multiplier = -g(static_cast<Eigen::Index>(j));
      if (active[j].index >= cons.n_eq && active[j].multiplier < -1e-12 * scale) return std::nullopt;
    }
    MinNormQpResult res;
    res.p = solver.least_norm(b);
    int argmax = -1;
    if (max_violation(cons, res.p, in_set, argmax) > feas_tol) return std::nullopt;
    res.active = std::move(active);
    res.warm_start_accepted = true;
    return res;
  } catch (const RankDeficiencyError&) {
    return std::nullopt;
  }
}

class DualActiveSet {
 public:
  DualActiveSet(const LinearConstraints& cons, int max_pivots)
      : cons_(cons), max_pivots_(max_pivots), p_(Vec::Zero(cons.normals.rows())),
        in_set_(cons.normals.cols(), false) {}

  MinNormQpResult run(double feas_tol) {
    for (int k = 0; k < cons_.n_eq; ++k) {
      double viol = cons_.normals.col(k).dot(p_) - cons_.rhs(k);
      add(k, viol >= 0.0 ? 1.0 : -1.0, true);
    }
    for (;;) {
      int k = -1;
      double worst = max_violation(cons_, p_, in_set_, k);
      if (k < 0 || worst <= feas_tol) break;
      add(k, 1.0, false);
    }
    MinNormQpResult res;
    res.pivots = pivots_;
    if (!active_.empty()) {
      GramSolver solver(oriented_normals(cons_, active_), 1e-14);
      res.p = solver.least_norm(oriented_rhs(cons_, active_));
    } else {
      res.p = p_;
    }
    res.active = active_;
    return res;
  }

 private:
  void add(int k, double orientation, bool equality) {
    Vec nk = orientation * cons_.normals.col(k);
    double bk = orientation * cons_.rhs(k);
    double u_new = 0.0;
    for (;;) {
      if (++pivots_ > max_pivots_)
        throw IterationLimitError("active-set pivot budget exhausted", nk.dot(p_) - bk);
      Vec z = -nk;
      Vec r(0);
      if (!active_.empty()) {
        GramSolver solver(oriented_normals(cons_, active_), 1e-14);
        r = solver.least_squares(nk);
        z = -solver.project_out(nk);
      }
      double viol = nk.dot(p_) - bk;
      double zz = z.squaredNorm();
      bool dependent = std::sqrt(zz) <= 1e-10 * nk.norm();
      double t2 = dependent ? kInf : std::max(viol, 0.0) / zz;
      double t1 = kInf;
      int blocking = -1;
      for (size_t j = 0; j < active_.size(); ++j) {
        if (active_[j].index < cons_.n_eq) continue;
        double rj = r(static_cast<Eigen::Index>(j));
        if (rj > 0.0 && active_[j].multiplier / rj < t1) {
          t1 = active_[j].multiplier / rj;
          blocking = static_cast<int>(j);
        }
      }
      if (t1 == kInf && t2 == kInf) {
        if (equality && std::abs(viol) <= 1e-12 * std::max(1.0, std::abs(bk))) return;
        throw InfeasibleError("constraint " + std::to_string(k) + " cannot be satisfied");
      }
      double t = std::min(t1, t2);
      if (!dependent) p_ += t * z;
      for (size_t j = 0; j < active_.size(); ++j)
        active_[j].multiplier -= t * r(static_cast<Eigen::Index>(j));
      u_new += t;
      if (t2 <= t1) {
        active_.push_back({k, orientation, u_new});
        in_set_[k] = true;
        return;
      }
      in_set_[active_[blocking].index] = false;
      active_.erase(active_.begin() + blocking);
    }
  }

  const LinearConstraints& cons_;
  int max_pivots_;
  int pivots_ = 0;
  Vec p_;
  std::vector<bool> in_set_;
  std::vector<ActiveConstraint> active_;
};

}  // namespace

MinNormQpResult min_norm_qp(const LinearConstraints& cons, const std::vector<int>& warm_active,
                            int max_pivots, double feas_tol) {
  if (!warm_active.empty()) {
    if (auto res = try_working_set(cons, warm_active, feas_tol)) return *res;
  }
  return DualActiveSet(cons, max_pivots).run(feas_tol);
}

}  // namespace certiscope
