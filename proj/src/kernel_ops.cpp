#include "certiscope/kernel_ops.hpp"

#include "certiscope/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace certiscope {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_order(int order) {
  if (order < 0 || order > kMaxDerivativeOrder)
    throw DomainError("derivative order " + std::to_string(order) + " outside 0.." +
                      std::to_string(kMaxDerivativeOrder));
}

// cos(theta + n pi/2) and sin(theta + n pi/2) without rounding the phase.
double cos_shift(double c, double s, int n) {
  switch (n & 3) {
    case 0: return c;
    case 1: return -s;
    case 2: return -c;
    default: return s;
  }
}

double sin_shift(double c, double s, int n) {
  switch (n & 3) {
    case 0: return s;
    case 1: return c;
    case 2: return -s;
    default: return -c;
  }
}

// Probabilists' Hermite polynomial He_n(x).
double hermite(int n, double x) {
  double prev = 1.0;
  if (n == 0) return prev;
  double cur = x;
  for (int k = 1; k < n; ++k) {
    double next = x * cur - k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double ideal_eval(int fc, int order, double t) {
  double acc = order == 0 ? 1.0 : 0.0;
  for (int k = 1; k <= fc; ++k) {
    double w = kTwoPi * k;
    acc += 2.0 * std::pow(w, order) * cos_shift(std::cos(w * t), std::sin(w * t), order);
  }
  return acc;
}

double gaussian_eval(const GaussianBump& g, int order, double t) {
  double base = t - std::round(t);
  double acc = 0.0;
  for (int w = -g.wraps; w <= g.wraps; ++w) {
    double u = (base + w) / g.sigma;
    acc += hermite(order, u) * std::exp(-0.5 * u * u);
  }
  return acc * std::pow(-1.0 / g.sigma, order);
}

}  // namespace

double wrap_unit(double t) {
  double r = t - std::floor(t);
  return r >= 1.0 ? 0.0 : r;
}

double torus_distance(double s, double t) {
  double d = std::abs(wrap_unit(s) - wrap_unit(t));
  return std::min(d, 1.0 - d);
}

TorusKernel TorusKernel::ideal(int fc) {
  if (fc < 1) throw DomainError("ideal low-pass cutoff must be positive");
  return TorusKernel(IdealLowPass{fc});
}

TorusKernel TorusKernel::gaussian(double sigma, int wraps) {
  if (!(sigma > 0.0)) throw DomainError("gaussian width must be positive");
  if (wraps < 1) throw DomainError("gaussian periodization needs at least one wrap");
  return TorusKernel(GaussianBump{sigma, wraps});
}

double TorusKernel::eval(int order, double t) const {
  check_order(order);
  if (is_ideal()) return ideal_eval(ideal_params().fc, order, t);
  return gaussian_eval(gaussian_params(), order, t);
}

double eval_kernel_deriv(const TorusKernel& kernel, int order, double t) {
  return kernel.eval(order, t);
}

std::vector<double> GridSpec::points() const {
  std::vector<double> z(P);
  for (int i = 0; i < P; ++i) z[i] = point(i);
  return z;
}

ObservationSpace::ObservationSpace(TorusKernel kernel, int quadrature_nodes)
    : kernel_(kernel),
      dim_(kernel.is_ideal() ? 2 * kernel.ideal_params().fc + 1 : quadrature_nodes) {
  if (dim_ < 1) throw DomainError("observation space must have positive dimension");
}

ObservationSpace ObservationSpace::for_grid(const TorusKernel& kernel, int P) {
  return ObservationSpace(kernel, std::max(4096, 64 * P));
}

Vec ObservationSpace::column(double y, int order) const {
  check_order(order);
  Vec c(dim_);
  if (kernel_.is_ideal()) {
    int fc = kernel_.ideal_params().fc;
    c(0) = order == 0 ? 1.0 : 0.0;
    for (int k = 1; k <= fc; ++k) {
      double w = kTwoPi * k;
      double scale = std::numbers::sqrt2 * std::pow(w, order);
      double cs = std::cos(w * y), sn = std::sin(w * y);
      c(k) = scale * cos_shift(cs, sn, order);
      c(fc + k) = scale * sin_shift(cs, sn, order);
    }
    return c;
  }
  // d^n/dy^n k(x - y) = (-1)^n k^{(n)}(x - y)
  double sign = (order % 2 == 0) ? 1.0 : -1.0;
  double weight = sign / std::sqrt(static_cast<double>(dim_));
  for (int m = 0; m < dim_; ++m) {
    double x = static_cast<double>(m) / dim_;
    c(m) = weight * gaussian_eval(kernel_.gaussian_params(), order, x - y);
  }
  return c;
}

Mat ObservationSpace::columns(std::span<const double> ys, int order) const {
  Mat m(dim_, static_cast<Eigen::Index>(ys.size()));
  for (size_t j = 0; j < ys.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = column(ys[j], order);
  return m;
}

double ObservationSpace::adjoint_eval(const Vec& q, int order, double t) const {
  return column(t, order).dot(q);
}

Vec ObservationSpace::adjoint_eval(const Vec& q, int order, std::span<const double> ts) const {
  Vec out(static_cast<Eigen::Index>(ts.size()));
  for (size_t j = 0; j < ts.size(); ++j) out(static_cast<Eigen::Index>(j)) = adjoint_eval(q, order, ts[j]);
  return out;
}

double adjoint_eval(const ObservationSpace& space, const Vec& q, int order, double t) {
  return space.adjoint_eval(q, order, t);
}

GridOperator build_grid_operator(const ObservationSpace& space, const GridSpec& grid) {
  auto z = grid.points();
  return GridOperator{grid, space.columns(z, 0), space.columns(z, 1)};
}

Mat SpikeOperators::gamma() const {
  Mat g(deriv[0].rows(), 2 * deriv[0].cols());
  g << deriv[0], deriv[1];
  return g;
}

SpikeOperators build_spike_operators(const ObservationSpace& space, std::span<const double> x0,
                                     int max_order) {
  check_order(max_order);
  for (size_t i = 0; i < x0.size(); ++i)
    for (size_t j = i + 1; j < x0.size(); ++j)
      if (torus_distance(x0[i], x0[j]) < 1e-12)
        throw DomainError("spike positions must be pairwise distinct");
  SpikeOperators ops;
  ops.x0.assign(x0.begin(), x0.end());
  for (int k = 0; k <= std::max(max_order, 1); ++k) ops.deriv.push_back(space.columns(x0, k));
  return ops;
}

}  // namespace certiscope
