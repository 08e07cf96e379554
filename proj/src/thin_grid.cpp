#include "certiscope/thin_grid.hpp"

#include "certiscope/errors.hpp"
#include "certiscope/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace certiscope {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// rho = (M^T M)^{-1} D^T p with M the projection of D away from the span solved by `base`.
// Returns zero when D^T p vanishes against its natural scale (symmetry-forced shifts).
Vec projected_shift(const GramSolver& base, const Mat& D, const Vec& p) {
  Vec rhs = D.transpose() * p;
  double scale = 0.0;
  for (Eigen::Index j = 0; j < D.cols(); ++j) scale = std::max(scale, D.col(j).norm() * p.norm());
  if (rhs.cwiseAbs().maxCoeff() <= 1e-12 * scale) return Vec::Zero(D.cols());
  Mat M = base.project_out(D);
  return GramSolver(M).solve_gram(rhs);
}

Vec vanishing_coords(const SpikeOperators& ops, const Vec& signs) {
  Vec rhs = Vec::Zero(2 * signs.size());
  rhs.head(signs.size()) = signs;
  return GramSolver(ops.gamma()).least_norm(rhs);
}

}  // namespace

void SpikeMeasure::validate(bool positive_only) const {
  if (positions.size() != amplitudes.size()) throw DomainError("positions and amplitudes differ in length");
  if (positions.empty()) throw DomainError("spike measure is empty");
  for (double a : amplitudes) {
    if (a == 0.0) throw DomainError("spike amplitudes must be nonzero");
    if (positive_only && a < 0.0) throw DomainError("C-BP operations need positive amplitudes");
  }
  if (min_separation() < 1e-12) throw DomainError("spike positions must be pairwise distinct");
}

double SpikeMeasure::min_separation() const {
  double sep = kInf;
  for (size_t i = 0; i < positions.size(); ++i)
    for (size_t j = i + 1; j < positions.size(); ++j) sep = std::min(sep, torus_distance(positions[i], positions[j]));
  return sep;
}

Vec SpikeMeasure::signs() const {
  Vec s(static_cast<Eigen::Index>(amplitudes.size()));
  for (size_t i = 0; i < amplitudes.size(); ++i) s(static_cast<Eigen::Index>(i)) = amplitudes[i] > 0 ? 1.0 : -1.0;
  return s;
}

VanishingPrecertificate vanishing_precertificate(const ObservationSpace& space, const SpikeMeasure& m0) {
  m0.validate();
  SpikeOperators ops = build_spike_operators(space, m0.positions, 1);
  Vec s = m0.signs();
  Vec p = vanishing_coords(ops, s);
  // block form: Phi^{+,*}s - Pi Phi' (Phi'^* Pi Phi')^{-1} Phi'^* Phi^{+,*} s
  GramSolver base(ops.deriv[0]);
  Vec pf = base.least_norm(s);
  Mat M = base.project_out(ops.deriv[1]);
  Vec p_block = pf - M * GramSolver(M).solve_gram(Vec(ops.deriv[1].transpose() * pf));
  double gap = (p - p_block).cwiseAbs().maxCoeff();
  return {ContinuousCertificate(space, p), gap};
}

ThirdDerivativePrecertificate third_derivative_precertificate(const ObservationSpace& space,
                                                              const SpikeMeasure& m0) {
  m0.validate(true);
  SpikeOperators ops = build_spike_operators(space, m0.positions, 3);
  const Eigen::Index N = static_cast<Eigen::Index>(m0.size());
  Mat G3(ops.deriv[0].rows(), 3 * N);
  G3 << ops.deriv[0], ops.deriv[1], ops.deriv[3];
  Vec rhs = Vec::Zero(3 * N);
  rhs.head(N).setOnes();
  Vec q = GramSolver(G3).least_norm(rhs);
  // projection form: p_V - tPi Phi3 (Phi3^* tPi Phi3)^{-1} Phi3^* p_V
  GramSolver gamma(ops.gamma());
  Vec ones = Vec::Ones(N);
  Vec pv = vanishing_coords(ops, ones);
  Mat M = gamma.project_out(ops.deriv[3]);
  Vec q_proj = pv - M * GramSolver(M).solve_gram(Vec(ops.deriv[3].transpose() * pv));
  double gap = (q - q_proj).cwiseAbs().maxCoeff();
  return {ContinuousCertificate(space, q), gap};
}

NondegeneracyReport check_certificate_nondegeneracy(const ContinuousCertificate& eta, const SpikeMeasure& m0,
                                                    int scan_points, bool one_sided, bool need_fourth,
                                                    double margin_tol) {
  m0.validate();
  NondegeneracyReport rep;
  double sep = m0.size() > 1 ? m0.min_separation() : kInf;
  double r = std::min(sep / 4.0, 0.02);
  rep.exclusion_radius = r;
  auto nearest = [&](double t) {
    double d = kInf;
    for (double x : m0.positions) d = std::min(d, torus_distance(t, x));
    return d;
  };
  auto value = [&](double t) { return one_sided ? eta(t) : std::abs(eta(t)); };

  std::vector<double> ts(scan_points);
  for (int j = 0; j < scan_points; ++j) ts[j] = static_cast<double>(j) / scan_points;
  Vec raw = eta.sample(ts, 0);
  Vec vals = one_sided ? raw : Vec(raw.cwiseAbs());

  rep.max_off_spike = -kInf;
  rep.window_max = -kInf;
  bool window_ok = true;
  const double dt = 1.0 / scan_points;
  for (int j = 0; j < scan_points; ++j) {
    double d = nearest(ts[j]);
    double v = vals(j);
    if (d >= r) {
      bool local_max = v >= vals((j + scan_points - 1) % scan_points) && v >= vals((j + 1) % scan_points);
      if (local_max) {
        // Newton on eta' around the sample
        double t = ts[j];
        for (int it = 0; it < 30; ++it) {
          double d1 = eta(t, 1), d2 = eta(t, 2);
          if (d2 == 0.0) break;
          double step = d1 / d2;
          if (std::abs(step) > dt) break;
          t -= step;
          if (std::abs(step) < 1e-15) break;
        }
        if (std::abs(t - ts[j]) <= dt && nearest(t) >= r) v = std::max(v, value(t));
      }
      if (v > rep.max_off_spike) {
        rep.max_off_spike = v;
        rep.argmax_off_spike = ts[j];
      }
    } else if (d > 0.5 * dt) {
      rep.window_max = std::max(rep.window_max, v);
      if (!(v < 1.0)) window_ok = false;
    }
  }

  Vec s = m0.signs();
  bool curvature_ok = true;
  rep.min_curvature = kInf;
  for (size_t nu = 0; nu < m0.size(); ++nu) {
    double c = eta(m0.positions[nu], 2);
    rep.curvature.push_back(c);
    rep.min_curvature = std::min(rep.min_curvature, std::abs(c));
    double signed_c = one_sided ? c : s(static_cast<Eigen::Index>(nu)) * c;
    if (!(signed_c < 0.0)) curvature_ok = false;
    if (need_fourth) {
      double f4 = eta(m0.positions[nu], 4);
      rep.fourth.push_back(f4);
      if (!(f4 > 0.0)) curvature_ok = false;
    }
  }
  rep.holds = rep.max_off_spike < 1.0 - margin_tol && window_ok && curvature_ok;
  return rep;
}

NondegeneracyReport check_ndsc(const ObservationSpace& space, const SpikeMeasure& m0, int scan_points) {
  return check_certificate_nondegeneracy(vanishing_precertificate(space, m0).eta, m0, scan_points, false, false);
}

NondegeneracyReport check_tndsc(const ObservationSpace& space, const SpikeMeasure& m0, int scan_points) {
  return check_certificate_nondegeneracy(third_derivative_precertificate(space, m0).mu, m0, scan_points, true,
                                         true);
}

NaturalShift make_natural_shift(const Vec& rho, const Vec& sign_scale) {
  NaturalShift ns;
  ns.rho = rho;
  double norm = rho.size() ? rho.cwiseAbs().maxCoeff() : 0.0;
  ns.zero_tol = norm > 0.0 ? 1e-9 * norm : 1e-12;
  ns.epsilon = Eigen::VectorXi::Zero(rho.size());
  for (Eigen::Index i = 0; i < rho.size(); ++i) {
    if (std::abs(rho(i)) < ns.zero_tol) continue;
    ns.epsilon(i) = sign_scale(i) * rho(i) > 0 ? 1 : -1;
  }
  return ns;
}

NaturalShift natural_shift_lasso(const ObservationSpace& space, const SpikeMeasure& m0) {
  m0.validate();
  SpikeOperators ops = build_spike_operators(space, m0.positions, 1);
  GramSolver check(ops.gamma());
  GramSolver base(ops.deriv[0]);
  Vec s = m0.signs();
  Vec rho = projected_shift(base, ops.deriv[1], base.least_norm(s));
  return make_natural_shift(rho, s);
}

NaturalShift natural_shift_cbp(const ObservationSpace& space, const SpikeMeasure& m0) {
  m0.validate(true);
  SpikeOperators ops = build_spike_operators(space, m0.positions, 3);
  const Eigen::Index N = static_cast<Eigen::Index>(m0.size());
  Mat G3(ops.deriv[0].rows(), 3 * N);
  G3 << ops.deriv[0], ops.deriv[1], ops.deriv[3];
  GramSolver check(G3);
  GramSolver gamma(ops.gamma());
  Vec pv = vanishing_coords(ops, Vec::Ones(N));
  Vec rho = projected_shift(gamma, ops.deriv[3], pv);
  return make_natural_shift(rho, -Vec::Ones(N));
}

std::vector<int> spike_grid_indices(const SpikeMeasure& m0, const GridSpec& grid) {
  std::vector<int> idx;
  for (double x : m0.positions) {
    double scaled = wrap_unit(x) * grid.P;
    double r = std::round(scaled);
    if (std::abs(scaled - r) > 1e-9) throw DomainError("spike at " + std::to_string(x) + " is not on the grid");
    idx.push_back(static_cast<int>(r) % grid.P);
  }
  return idx;
}

namespace {

ExtendedSupportPrediction predict_common(const SpikeMeasure& m0, const GridSpec& grid, const NaturalShift& shift,
                                         const NondegeneracyReport& nd, const char* nd_name) {
  ExtendedSupportPrediction pred;
  pred.grid = grid;
  pred.spike_indices = spike_grid_indices(m0, grid);
  pred.shift = shift;
  if (m0.size() > 1 && !(m0.min_separation() > 2.0 * grid.h())) pred.failed_hypotheses.push_back("separation");
  if (!nd.holds) pred.failed_hypotheses.push_back(nd_name);
  if ((shift.epsilon.array() == 0).any()) pred.failed_hypotheses.push_back("rho_zero");
  pred.hypothesis_ok = pred.failed_hypotheses.empty();
  return pred;
}

}  // namespace

ExtendedSupportPrediction predict_extended_support_lasso(const ObservationSpace& space, const SpikeMeasure& m0,
                                                         const GridSpec& grid, int scan_points) {
  m0.validate();
  spike_grid_indices(m0, grid);
  NaturalShift shift = natural_shift_lasso(space, m0);
  NondegeneracyReport nd = check_ndsc(space, m0, scan_points > 0 ? scan_points : 64 * grid.P);
  ExtendedSupportPrediction pred = predict_common(m0, grid, shift, nd, "ndsc");
  Vec s = m0.signs();
  std::vector<SignedEntry> entries;
  for (size_t nu = 0; nu < m0.size(); ++nu) {
    int i = pred.spike_indices[nu];
    int sg = static_cast<int>(s(static_cast<Eigen::Index>(nu)));
    entries.push_back({i, sg});
    int e = shift.epsilon(static_cast<Eigen::Index>(nu));
    if (e != 0) entries.push_back({(i + e + grid.P) % grid.P, sg});
  }
  pred.lasso = SignedSupport(std::move(entries));
  return pred;
}

ExtendedSupportPrediction predict_extended_support_cbp(const ObservationSpace& space, const SpikeMeasure& m0,
                                                       const GridSpec& grid, int scan_points) {
  m0.validate(true);
  spike_grid_indices(m0, grid);
  NaturalShift shift = natural_shift_cbp(space, m0);
  NondegeneracyReport nd = check_tndsc(space, m0, scan_points > 0 ? scan_points : 64 * grid.P);
  ExtendedSupportPrediction pred = predict_common(m0, grid, shift, nd, "tndsc");
  for (size_t nu = 0; nu < m0.size(); ++nu) {
    int i = pred.spike_indices[nu];
    pred.cbp.up.push_back(i);
    pred.cbp.down.push_back(i);
    double rho = shift.rho(static_cast<Eigen::Index>(nu));
    if (shift.epsilon(static_cast<Eigen::Index>(nu)) == 0) continue;
    if (rho > 0) pred.cbp.up.push_back((i - 1 + grid.P) % grid.P);
    else pred.cbp.down.push_back((i + 1) % grid.P);
  }
  std::sort(pred.cbp.up.begin(), pred.cbp.up.end());
  std::sort(pred.cbp.down.begin(), pred.cbp.down.end());
  return pred;
}

std::vector<SpikeWindow> spike_windows(const SpikeMeasure& m0, const GridSpec& grid, int half) {
  std::vector<SpikeWindow> w;
  for (int i : spike_grid_indices(m0, grid)) w.push_back({i - half, i + half});
  return w;
}

std::vector<SaturationClass> classify_saturations(const CbpCertificate& mu, const GridSpec& grid,
                                                  const std::vector<SpikeWindow>& windows) {
  const int P = grid.P;
  std::vector<SaturationClass> out;
  for (const auto& w : windows) {
    // offsets within the window keep the order across the wrap point
    std::vector<int> right, left;
    for (int off = 0; off <= w.hi - w.lo; ++off) {
      int k = ((w.lo + off) % P + P) % P;
      if (std::binary_search(mu.sat_up.begin(), mu.sat_up.end(), k)) right.push_back(off);
      if (std::binary_search(mu.sat_down.begin(), mu.sat_down.end(), k)) left.push_back(off);
    }
    auto describe = [&] {
      std::string d = "S_right={";
      for (int o : right) d += std::to_string(((w.lo + o) % P + P) % P) + " ";
      d += "} S_left={";
      for (int o : left) d += std::to_string(((w.lo + o) % P + P) % P) + " ";
      return d + "}";
    };
    auto run_ok = [](const std::vector<int>& v) { return v.size() <= 2 && (v.size() < 2 || v[1] == v[0] + 1); };
    if (right.empty() && left.empty()) throw ClassificationError("no saturation in window: " + describe());
    if (!run_ok(right) || !run_ok(left)) throw ClassificationError("saturation is not a short run: " + describe());
    if (!right.empty() && !left.empty() && right.back() > left.front())
      throw ClassificationError("max S_right exceeds min S_left: " + describe());
    SaturationClass c;
    for (int o : right) c.s_right.push_back(((w.lo + o) % P + P) % P);
    for (int o : left) c.s_left.push_back(((w.lo + o) % P + P) % P);
    int shared = (!right.empty() && !left.empty() && right.back() == left.front()) ? 1 : 0;
    c.masses = static_cast<int>(right.size() + left.size()) - shared;
    c.third_derivative_generic = right.empty() || left.empty();
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace certiscope
