#include "certiscope/errors.hpp"
#include "certiscope/linalg.hpp"
#include "certiscope/parallel.hpp"
#include "certiscope/thin_grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace certiscope {

namespace {

constexpr double kGamma3 = 1.0 / 6.0 - 1.0 / 4.0;

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double den = n * sxx - sx * sx;
  return den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
}

UpDownSupport split_support(const SignedSupport& s, int P) {
  UpDownSupport out;
  for (int k : s.indices()) (k < P ? out.up : out.down).push_back(k < P ? k : k - P);
  return out;
}

int shift_sign(const Eigen::VectorXi& eps, Eigen::Index nu) { return eps(nu) != 0 ? eps(nu) : 1; }

// Columns [Phi_x0, Phi_{x0 + eps h}]
Mat lasso_extended_block(const ObservationSpace& space, const std::vector<double>& x0, const Eigen::VectorXi& eps,
                         double h) {
  std::vector<double> shifted;
  for (size_t nu = 0; nu < x0.size(); ++nu)
    shifted.push_back(wrap_unit(x0[nu] + shift_sign(eps, static_cast<Eigen::Index>(nu)) * h));
  Mat A = space.columns(x0, 0);
  Mat S = space.columns(shifted, 0);
  Mat out(A.rows(), 2 * A.cols());
  out << A, S;
  return out;
}

// Columns [A + (h/2) B, A - (h/2) B, Phi(x0 + eps h) - (h/2) Phi'(x0 + eps h) D] with B = Phi' D
Mat cbp_extended_block(const ObservationSpace& space, const std::vector<double>& x0, const Eigen::VectorXi& eps,
                       double h) {
  const Eigen::Index N = static_cast<Eigen::Index>(x0.size());
  std::vector<double> shifted;
  Vec d(N);
  for (Eigen::Index nu = 0; nu < N; ++nu) {
    d(nu) = shift_sign(eps, nu);
    shifted.push_back(wrap_unit(x0[static_cast<size_t>(nu)] + d(nu) * h));
  }
  Mat A = space.columns(x0, 0);
  Mat B = space.columns(x0, 1) * d.asDiagonal();
  Mat C = space.columns(shifted, 0) - 0.5 * h * space.columns(shifted, 1) * d.asDiagonal();
  Mat out(A.rows(), 3 * N);
  out << A + 0.5 * h * B, A - 0.5 * h * B, C;
  return out;
}

}  // namespace

const char* to_string(Variant v) { return v == Variant::Lasso ? "lasso" : "cbp"; }

GridOperators build_thin_grid(const ObservationSpace& space, const GridSpec& grid) {
  GridOperators g{build_grid_operator(space, grid), Mat()};
  g.cone = assemble_cone_operator(g.op.phi, g.op.dphi, grid.h());
  return g;
}

GammaProbeResult gamma_convergence_probe(const ObservationSpace& space, const Vec& y, double lambda,
                                         const std::vector<int>& grid_sizes, Variant variant) {
  if (!(lambda > 0.0)) throw DomainError("gamma probe needs lambda > 0");
  if (y.size() != space.dim()) throw DomainError("observation has the wrong dimension");
  for (size_t k = 1; k < grid_sizes.size(); ++k)
    if (!GridSpec{grid_sizes[k - 1]}.nested_in(GridSpec{grid_sizes[k]}))
      throw DomainError("grids must be nested");
  GammaProbeResult res;
  res.grid_sizes = grid_sizes;
  res.values = parallel_map(grid_sizes.size(), [&](std::size_t k) {
    GridOperators g = build_thin_grid(space, GridSpec{grid_sizes[k]});
    const Mat& op = variant == Variant::Lasso ? g.op.phi : g.cone;
    SolutionPath path = variant == Variant::Lasso ? lasso_homotopy(op, y, lambda) : positive_lasso_homotopy(op, y, lambda);
    Vec x = path.evaluate(lambda);
    return 0.5 * (y - op * x).squaredNorm() + lambda * x.lpNorm<1>();
  });
  const double scale = res.values.empty() ? 0.0 : std::abs(res.values.front());
  res.non_increasing = true;
  res.cauchy = true;
  for (size_t k = 1; k < res.values.size(); ++k) {
    if (res.values[k] > res.values[k - 1] + 1e-12 * scale) res.non_increasing = false;
    if (k >= 2) {
      double prev = std::abs(res.values[k - 1] - res.values[k - 2]);
      double cur = std::abs(res.values[k] - res.values[k - 1]);
      if (cur > prev + 1e-12 * scale) res.cauchy = false;
    }
  }
  return res;
}

PathDiagnostics lasso_path_diagnostics(const SolutionPath& path, const SignedSupport& predicted) {
  PathDiagnostics d;
  d.segments = path.segments.size();
  if (path.segments.empty()) return d;
  d.lowest_matches = path.lowest().support == predicted;
  d.lambda0 = d.lowest_matches ? path.lowest().lambda_hi : 0.0;
  return d;
}

PathDiagnostics cbp_path_diagnostics(const SolutionPath& path, const UpDownSupport& predicted) {
  PathDiagnostics d;
  d.segments = path.segments.size();
  if (path.segments.empty()) return d;
  d.lowest_matches = split_support(path.lowest().support, static_cast<int>(path.dim / 2)) == predicted;
  d.lambda0 = d.lowest_matches ? path.lowest().lambda_hi : 0.0;
  return d;
}

ScalingProbeResult scaling_probe_lambda0(const ObservationSpace& space, const SpikeMeasure& m0,
                                         const std::vector<int>& grid_sizes, Variant variant) {
  m0.validate(variant == Variant::Cbp);
  ScalingProbeResult res;
  res.rows = parallel_map(grid_sizes.size(), [&](std::size_t k) {
    GridSpec grid{grid_sizes[k]};
    GridOperators g = build_thin_grid(space, grid);
    ExtendedSupportPrediction pred = variant == Variant::Lasso ? predict_extended_support_lasso(space, m0, grid)
                                                               : predict_extended_support_cbp(space, m0, grid);
    if (!pred.hypothesis_ok) {
      std::string why;
      for (const auto& f : pred.failed_hypotheses) why += " " + f;
      throw ProbeError("P=" + std::to_string(grid.P) + ": hypotheses fail:" + why);
    }
    Vec a0 = Vec::Zero(grid.P);
    for (size_t nu = 0; nu < m0.size(); ++nu) a0(pred.spike_indices[nu]) = m0.amplitudes[nu];
    const Mat& op = variant == Variant::Lasso ? g.op.phi : g.cone;
    Vec y0 = g.op.phi * a0;
    double lmax = (op.transpose() * y0).cwiseAbs().maxCoeff();
    ScalingRow row;
    row.P = grid.P;
    row.h = grid.h();
    std::string seen;
    for (double rel : {1e-6, 1e-9, 1e-11}) {
      SolutionPath path = variant == Variant::Lasso ? lasso_homotopy(op, y0, rel * lmax)
                                                    : positive_lasso_homotopy(op, y0, rel * lmax);
      PathDiagnostics d = variant == Variant::Lasso ? lasso_path_diagnostics(path, pred.lasso)
                                                    : cbp_path_diagnostics(path, pred.cbp);
      if (d.lowest_matches) {
        row.matched = true;
        row.lambda0 = d.lambda0;
        row.max_slope = path.lowest().slope.cwiseAbs().maxCoeff();
        return row;
      }
      seen = std::to_string(path.lowest().support.size()) + " active at lambda/lambda_max=" + std::to_string(rel);
    }
    throw ProbeError("P=" + std::to_string(grid.P) + ": predicted support never reached; last path has " + seen);
  });
  std::vector<double> hs, l0, sl;
  for (const auto& r : res.rows) {
    hs.push_back(r.h);
    l0.push_back(r.lambda0);
    sl.push_back(r.max_slope);
  }
  res.slope = log_log_slope(hs, l0);
  res.lipschitz_slope = log_log_slope(hs, sl);
  return res;
}

std::vector<GramCheckRow> gram_expansion_check(const ObservationSpace& space, const std::vector<double>& x0,
                                               const Vec& signs, const std::vector<double>& h_list,
                                               Variant variant) {
  const Eigen::Index N = static_cast<Eigen::Index>(x0.size());
  if (signs.size() != N) throw DomainError("one sign per spike is required");
  SpikeMeasure m0{x0, std::vector<double>(signs.data(), signs.data() + N)};
  NaturalShift shift = variant == Variant::Lasso ? natural_shift_lasso(space, m0) : natural_shift_cbp(space, m0);
  Vec d(N);
  for (Eigen::Index nu = 0; nu < N; ++nu) d(nu) = shift_sign(shift.epsilon, nu);
  std::vector<GramCheckRow> rows;
  for (double h : h_list) {
    GramCheckRow row;
    row.h = h;
    try {
      if (variant == Variant::Lasso) {
        GramSolver solver(lasso_extended_block(space, x0, shift.epsilon, h));
        Vec s2(2 * N);
        s2 << signs, signs;
        Vec exact = solver.solve_gram(s2);
        Vec dr = d.cwiseProduct(shift.rho) / h;
        Vec lead(2 * N);
        lead << dr, -dr;
        row.residual = (exact - lead).cwiseAbs().maxCoeff();
        row.leading = lead.cwiseAbs().maxCoeff();
        row.ratio = row.residual * h;
      } else {
        GramSolver solver(cbp_extended_block(space, x0, shift.epsilon, h));
        Vec exact = solver.solve_gram(Vec(Vec::Ones(3 * N)));
        Vec xi = d.cwiseProduct(shift.rho) / (kGamma3 * h * h * h);
        Vec lead(3 * N);
        lead << xi, Vec::Zero(N), -xi;
        row.residual = (exact - lead).cwiseAbs().maxCoeff();
        row.leading = lead.cwiseAbs().maxCoeff();
        row.ratio = row.residual * h * h * h;
      }
    } catch (const RankDeficiencyError& e) {
      row.rank_ok = false;
      row.note = e.what();
    }
    rows.push_back(row);
  }
  return rows;
}

Vec lasso_finite_h_shift(const ObservationSpace& space, const SpikeMeasure& m0, const Eigen::VectorXi& epsilon,
                         double h) {
  m0.validate();
  const Eigen::Index N = static_cast<Eigen::Index>(m0.size());
  Vec s = m0.signs();
  Vec s2(2 * N);
  s2 << s, s;
  Vec v = GramSolver(lasso_extended_block(space, m0.positions, epsilon, h)).solve_gram(s2);
  Vec out(N);
  for (Eigen::Index nu = 0; nu < N; ++nu) out(nu) = -shift_sign(epsilon, nu) * h * v(N + nu);
  return out;
}

Vec cbp_finite_h_shift(const ObservationSpace& space, const SpikeMeasure& m0, const Eigen::VectorXi& epsilon,
                       double h) {
  m0.validate(true);
  const Eigen::Index N = static_cast<Eigen::Index>(m0.size());
  Vec g = GramSolver(cbp_extended_block(space, m0.positions, epsilon, h)).solve_gram(Vec(Vec::Ones(3 * N)));
  Vec out(N);
  for (Eigen::Index nu = 0; nu < N; ++nu) out(nu) = -kGamma3 * h * h * h * shift_sign(epsilon, nu) * g(2 * N + nu);
  return out;
}

}  // namespace certiscope
