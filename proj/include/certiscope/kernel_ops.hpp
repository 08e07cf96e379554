#pragma once

#include <Eigen/Dense>

#include <span>
#include <variant>
#include <vector>

namespace certiscope {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr int kMaxDerivativeOrder = 5;

/// Maps t to [0, 1).
double wrap_unit(double t);

/// Wrap-around distance on the torus.
double torus_distance(double s, double t);

struct IdealLowPass {
  int fc;
};

struct GaussianBump {
  double sigma;
  int wraps;
};

/// Convolution kernel phi(x, y) = k(x - y) on the unit torus.
class TorusKernel {
 public:
  static TorusKernel ideal(int fc);
  static TorusKernel gaussian(double sigma, int wraps = 3);

  bool is_ideal() const { return std::holds_alternative<IdealLowPass>(kind_); }
  const IdealLowPass& ideal_params() const { return std::get<IdealLowPass>(kind_); }
  const GaussianBump& gaussian_params() const { return std::get<GaussianBump>(kind_); }
  int smoothness_order() const { return kMaxDerivativeOrder; }

  /// k^{(order)}(t).
  double eval(int order, double t) const;

 private:
  explicit TorusKernel(std::variant<IdealLowPass, GaussianBump> kind) : kind_(kind) {}
  std::variant<IdealLowPass, GaussianBump> kind_;
};

double eval_kernel_deriv(const TorusKernel& kernel, int order, double t);

struct GridSpec {
  int P;
  double h() const { return 1.0 / P; }
  double point(int i) const { return static_cast<double>(i) / P; }
  std::vector<double> points() const;
  /// True when every point of this grid is a point of `finer`.
  bool nested_in(const GridSpec& finer) const { return finer.P % P == 0; }
};

/// Coordinates of Im(Phi) in an orthonormal basis.
///
/// Ideal low-pass: basis 1, sqrt2 cos(2 pi k x), sqrt2 sin(2 pi k x) for k = 1..fc.
/// Gaussian: trapezoid samples on M equispaced nodes scaled by M^{-1/2}, so
/// Euclidean products approximate L2 products.
class ObservationSpace {
 public:
  explicit ObservationSpace(TorusKernel kernel, int quadrature_nodes = 4096);
  /// Quadrature of M = max(4096, 64 P) nodes when the kernel is Gaussian.
  static ObservationSpace for_grid(const TorusKernel& kernel, int P);

  const TorusKernel& kernel() const { return kernel_; }
  int dim() const { return dim_; }

  /// Coordinates of d^order/dy^order phi(., y).
  Vec column(double y, int order = 0) const;
  Mat columns(std::span<const double> ys, int order = 0) const;

  /// eta^{(order)}(t) for eta = Phi^* q.
  double adjoint_eval(const Vec& q, int order, double t) const;
  Vec adjoint_eval(const Vec& q, int order, std::span<const double> ts) const;

 private:
  TorusKernel kernel_;
  int dim_;
};

double adjoint_eval(const ObservationSpace& space, const Vec& q, int order, double t);

struct GridOperator {
  GridSpec grid;
  Mat phi;   ///< columns phi(., z_i)
  Mat dphi;  ///< columns d/dy phi(., z_i)
};

GridOperator build_grid_operator(const ObservationSpace& space, const GridSpec& grid);

struct SpikeOperators {
  std::vector<double> x0;
  std::vector<Mat> deriv;  ///< deriv[k] has columns d^k/dy^k phi(., x0_nu)
  Mat gamma() const;       ///< [Phi, Phi']
};

/// Throws DomainError on coincident points or order above the smoothness order.
SpikeOperators build_spike_operators(const ObservationSpace& space, std::span<const double> x0,
                                     int max_order);

}  // namespace certiscope
