#include "certiscope/abstract_lasso.hpp"
#include "certiscope/errors.hpp"
#include "certiscope/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace certiscope {

namespace {

constexpr double kTieTol = 1e-12;

struct Event {
  double lambda;
  int index;
  int sign;  // entering sign, 0 for an exit
};

SolutionPath run_homotopy(const Mat& A, const Vec& y, double lambda_min, bool nonneg) {
  if (!(lambda_min > 0.0)) throw DomainError("homotopy needs lambda_min > 0");
  const Eigen::Index P = A.cols();
  SolutionPath path;
  path.dim = P;
  path.nonnegative = nonneg;

  Vec aty = A.transpose() * y;
  double lmax = 0.0;
  int first = -1;
  for (Eigen::Index k = 0; k < P; ++k) {
    double c = nonneg ? aty(k) : std::abs(aty(k));
    if (c > lmax * (1.0 + kTieTol)) {
      lmax = c;
      first = static_cast<int>(k);
    }
  }
  path.lambda_max = lmax;
  if (lmax <= lambda_min) {
    path.breakpoints = {std::max(lmax, lambda_min), lambda_min};
    path.segments.push_back({path.breakpoints[0], lambda_min, SignedSupport(), Vec::Zero(P), Vec::Zero(P)});
    return path;
  }
  std::vector<int> tied;
  for (Eigen::Index k = 0; k < P; ++k) {
    double c = nonneg ? aty(k) : std::abs(aty(k));
    if (c >= lmax * (1.0 - kTieTol)) tied.push_back(static_cast<int>(k));
  }
  if (tied.size() > 1) path.ties.push_back({lmax, tied});

  std::vector<int> J{first};
  std::vector<int> sJ{aty(first) > 0 ? 1 : -1};
  std::vector<int> touched{first};
  double touched_lambda = lmax;
  double lam = lmax;
  path.breakpoints.push_back(lam);
  const long max_pivots = 10L * P + 10;

  for (long pivots = 0;; ++pivots) {
    if (pivots > max_pivots) throw IterationLimitError("homotopy pivot budget exhausted", lam);
    Mat AJ = select_columns(A, J);
    Vec s(static_cast<Eigen::Index>(sJ.size()));
    for (size_t k = 0; k < sJ.size(); ++k) s(static_cast<Eigen::Index>(k)) = sJ[k];
    Vec off, slo;
    try {
      GramSolver solver(AJ);
      off = solver.least_squares(y);
      slo = -solver.solve_gram(s);
    } catch (const RankDeficiencyError& e) {
      throw RankDeficiencyError(std::string("homotopy active set at lambda=") + std::to_string(lam) +
                                ": " + e.what());
    }
    // correlations are affine in lambda: c = e + lambda f
    Vec e = A.transpose() * (y - AJ * off);
    Vec f = -(A.transpose() * (AJ * slo));

    std::vector<char> active(P, 0);
    for (int j : J) active[j] = 1;
    auto is_touched = [&](int k) { return std::find(touched.begin(), touched.end(), k) != touched.end(); };
    auto admissible = [&](double cand, int k) {
      if (!(cand > 0.0) || cand > lam * (1.0 + 1e-10)) return false;
      return !(cand >= lam * (1.0 - kTieTol) && is_touched(k));
    };

    std::vector<Event> events;
    for (Eigen::Index k = 0; k < P; ++k) {
      if (active[k]) continue;
      for (int sigma : {1, -1}) {
        if (nonneg && sigma < 0) continue;
        double denom = sigma - f(k);
        // the correlation must approach the bound as lambda decreases
        if (!(sigma * denom > 0.0)) continue;
        double cand = e(k) / denom;
        if (admissible(cand, static_cast<int>(k))) events.push_back({std::min(cand, lam), static_cast<int>(k), sigma});
      }
    }
    for (size_t q = 0; q < J.size(); ++q) {
      double sl = slo(static_cast<Eigen::Index>(q));
      if (!(sl * sJ[q] > 0.0)) continue;
      double cand = -off(static_cast<Eigen::Index>(q)) / sl;
      if (admissible(cand, J[q])) events.push_back({std::min(cand, lam), J[q], 0});
    }

    double next = -1.0;
    for (const auto& ev : events) next = std::max(next, ev.lambda);

    auto push_segment = [&](double lo) {
      Vec offset = Vec::Zero(P), slope = Vec::Zero(P);
      std::vector<SignedEntry> entries;
      for (size_t q = 0; q < J.size(); ++q) {
        offset(J[q]) = off(static_cast<Eigen::Index>(q));
        slope(J[q]) = slo(static_cast<Eigen::Index>(q));
        entries.push_back({J[q], sJ[q]});
      }
      path.segments.push_back({lam, lo, SignedSupport(std::move(entries)), offset, slope});
      path.breakpoints.push_back(lo);
    };

    if (next <= lambda_min) {
      push_segment(lambda_min);
      break;
    }

    std::vector<int> group;
    const Event* chosen = nullptr;
    for (const auto& ev : events) {
      if (ev.lambda < next * (1.0 - kTieTol)) continue;
      group.push_back(ev.index);
      if (!chosen || ev.index < chosen->index) chosen = &ev;
    }
    if (group.size() > 1) {
      std::sort(group.begin(), group.end());
      group.erase(std::unique(group.begin(), group.end()), group.end());
      if (group.size() > 1) path.ties.push_back({next, group});
    }

    if (next < lam) push_segment(next);
    if (chosen->sign != 0) {
      J.push_back(chosen->index);
      sJ.push_back(chosen->sign);
    } else {
      auto it = std::find(J.begin(), J.end(), chosen->index);
      sJ.erase(sJ.begin() + (it - J.begin()));
      J.erase(it);
    }
    if (next < touched_lambda * (1.0 - kTieTol)) {
      touched.clear();
      touched_lambda = next;
    }
    touched.push_back(chosen->index);
    lam = std::min(lam, next);
  }
  return path;
}

}  // namespace

Vec SolutionPath::evaluate(double lambda) const {
  if (lambda >= lambda_max) return Vec::Zero(dim);
  return segment_at(lambda).at(lambda);
}

const PathSegment& SolutionPath::segment_at(double lambda) const {
  for (const auto& seg : segments)
    if (lambda >= seg.lambda_lo && lambda <= seg.lambda_hi) return seg;
  if (!segments.empty() && lambda > segments.front().lambda_hi) return segments.front();
  throw DomainError("lambda below the computed path");
}

SolutionPath lasso_homotopy(const Mat& op, const Vec& y, double lambda_min) {
  return run_homotopy(op, y, lambda_min, false);
}

SolutionPath positive_lasso_homotopy(const Mat& op, const Vec& y, double lambda_min) {
  return run_homotopy(op, y, lambda_min, true);
}

}  // namespace certiscope
