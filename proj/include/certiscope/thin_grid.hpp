#pragma once

#include "certiscope/abstract_lasso.hpp"
#include "certiscope/cone_lasso.hpp"
#include "certiscope/kernel_ops.hpp"

#include <optional>
#include <string>
#include <vector>

namespace certiscope {

/// Sum of alpha_nu delta_{x_nu} on the torus.
struct SpikeMeasure {
  std::vector<double> positions;
  std::vector<double> amplitudes;

  /// Throws DomainError on size mismatch, zero amplitude or coincident positions.
  void validate(bool positive_only = false) const;
  std::size_t size() const { return positions.size(); }
  double min_separation() const;
  Vec signs() const;
};

/// eta(t) = (Phi^* q)(t) evaluable anywhere on the torus.
class ContinuousCertificate {
 public:
  ContinuousCertificate(ObservationSpace space, Vec q) : space_(std::move(space)), q_(std::move(q)) {}
  const Vec& q() const { return q_; }
  const ObservationSpace& space() const { return space_; }
  double operator()(double t, int order = 0) const { return space_.adjoint_eval(q_, order, t); }
  Vec sample(std::span<const double> ts, int order = 0) const { return space_.adjoint_eval(q_, order, ts); }

 private:
  ObservationSpace space_;
  Vec q_;
};

struct VanishingPrecertificate {
  ContinuousCertificate eta;
  /// max |p_lstsq - p_block| between the pseudo-inverse form and the block-inversion form
  double formula_gap;
};

/// p_V = Gamma^{+,*}[sign alpha; 0]; throws RankDeficiencyError when Gamma is singular.
VanishingPrecertificate vanishing_precertificate(const ObservationSpace& space, const SpikeMeasure& m0);

struct ThirdDerivativePrecertificate {
  ContinuousCertificate mu;
  /// max gap between the least-norm form and the projection form built on p_V
  double formula_gap;
};

/// q_T: least-norm q with (Phi, Phi', Phi''')^* q = (1, 0, 0) at the spikes.
ThirdDerivativePrecertificate third_derivative_precertificate(const ObservationSpace& space,
                                                              const SpikeMeasure& m0);

struct NondegeneracyReport {
  bool holds = false;
  double max_off_spike = 0.0;       ///< sup of |eta| (or mu) at distance >= r from the spikes
  double argmax_off_spike = 0.0;
  double window_max = 0.0;          ///< sup inside the windows away from the spike itself
  double exclusion_radius = 0.0;
  std::vector<double> curvature;    ///< eta''(x_nu)
  std::vector<double> fourth;       ///< mu''''(x_nu), TNDSC only
  double min_curvature = 0.0;       ///< min_nu |eta''(x_nu)|
};

/// Scan of |eta| with exclusion radius min(sep/4, 0.02), refined around local maxima.
/// `one_sided` reads eta instead of |eta|; `need_fourth` adds the fourth-derivative sign test.
NondegeneracyReport check_certificate_nondegeneracy(const ContinuousCertificate& eta, const SpikeMeasure& m0,
                                                    int scan_points, bool one_sided, bool need_fourth,
                                                    double margin_tol = 1e-9);

NondegeneracyReport check_ndsc(const ObservationSpace& space, const SpikeMeasure& m0, int scan_points);
NondegeneracyReport check_tndsc(const ObservationSpace& space, const SpikeMeasure& m0, int scan_points);

struct NaturalShift {
  Vec rho;
  Eigen::VectorXi epsilon;  ///< +-1, or 0 when |rho_nu| < zero_tol
  double zero_tol = 0.0;
};

/// Applies zero_tol = 1e-9 ||rho||_inf (1e-12 when rho = 0) to sign(scale .* rho).
NaturalShift make_natural_shift(const Vec& rho, const Vec& sign_scale);

NaturalShift natural_shift_lasso(const ObservationSpace& space, const SpikeMeasure& m0);
/// epsilon = -sign(rho).
NaturalShift natural_shift_cbp(const ObservationSpace& space, const SpikeMeasure& m0);

struct ExtendedSupportPrediction {
  GridSpec grid;
  std::vector<int> spike_indices;
  NaturalShift shift;
  SignedSupport lasso;     ///< LASSO variant
  UpDownSupport cbp;       ///< C-BP variant
  bool hypothesis_ok = false;
  std::vector<std::string> failed_hypotheses;
};

/// Grid index of each spike; throws DomainError for an off-grid spike.
std::vector<int> spike_grid_indices(const SpikeMeasure& m0, const GridSpec& grid);

ExtendedSupportPrediction predict_extended_support_lasso(const ObservationSpace& space, const SpikeMeasure& m0,
                                                         const GridSpec& grid, int scan_points = 0);
ExtendedSupportPrediction predict_extended_support_cbp(const ObservationSpace& space, const SpikeMeasure& m0,
                                                       const GridSpec& grid, int scan_points = 0);

struct SpikeWindow {
  int lo;  ///< first grid index of the window, unreduced (may be negative)
  int hi;  ///< last grid index, inclusive and unreduced
};

struct SaturationClass {
  std::vector<int> s_right;  ///< grid indices with mu + (h/2) mu' = 1
  std::vector<int> s_left;   ///< grid indices with mu - (h/2) mu' = 1
  int masses = 0;            ///< 1..4
  bool third_derivative_generic = false;  ///< one of the two sets is empty
};

/// Table row per window. Throws ClassificationError when max S_right > min S_left,
/// when a set is not a run of at most two consecutive indices, or when both are empty.
std::vector<SaturationClass> classify_saturations(const CbpCertificate& mu, const GridSpec& grid,
                                                  const std::vector<SpikeWindow>& windows);

/// Window of half-width `half` grid steps around each spike.
std::vector<SpikeWindow> spike_windows(const SpikeMeasure& m0, const GridSpec& grid, int half);

enum class Variant { Lasso, Cbp };

const char* to_string(Variant v);

struct GridOperators {
  GridOperator op;
  Mat cone;  ///< [A + (h/2) B, A - (h/2) B]
};

GridOperators build_thin_grid(const ObservationSpace& space, const GridSpec& grid);

struct GammaProbeResult {
  std::vector<int> grid_sizes;
  std::vector<double> values;
  bool non_increasing = false;
  bool cauchy = false;  ///< increments shrink
};

/// Optimal value of the grid problem for each nested grid (exact, via the homotopy).
GammaProbeResult gamma_convergence_probe(const ObservationSpace& space, const Vec& y, double lambda,
                                         const std::vector<int>& grid_sizes, Variant variant);

struct ScalingRow {
  int P = 0;
  double h = 0.0;
  double lambda0 = 0.0;
  double max_slope = 0.0;  ///< ||slope||_inf of the lowest segment
  bool matched = false;
};

struct ScalingProbeResult {
  std::vector<ScalingRow> rows;
  double slope = 0.0;            ///< least-squares slope of log lambda0 against log h
  double lipschitz_slope = 0.0;  ///< same for log max_slope
};

/// Throws ProbeError when the prediction never appears as the lowest segment.
ScalingProbeResult scaling_probe_lambda0(const ObservationSpace& space, const SpikeMeasure& m0,
                                         const std::vector<int>& grid_sizes, Variant variant);

/// lambda0: the upper end of the lowest path segment when that segment carries the prediction.
struct PathDiagnostics {
  bool lowest_matches = false;
  double lambda0 = 0.0;
  std::size_t segments = 0;
};

PathDiagnostics lasso_path_diagnostics(const SolutionPath& path, const SignedSupport& predicted);
PathDiagnostics cbp_path_diagnostics(const SolutionPath& path, const UpDownSupport& predicted);

struct GramCheckRow {
  double h = 0.0;
  double residual = 0.0;  ///< ||exact - leading||_inf
  double leading = 0.0;   ///< ||leading||_inf
  double ratio = 0.0;     ///< residual * h^k, k = 1 (LASSO) or 3 (C-BP)
  bool rank_ok = true;
  std::string note;
};

/// Inverse-Gram expansion against its leading 1/h (LASSO) or 1/h^3 (C-BP) term.
std::vector<GramCheckRow> gram_expansion_check(const ObservationSpace& space, const std::vector<double>& x0,
                                               const Vec& signs, const std::vector<double>& h_list,
                                               Variant variant);

/// -epsilon .* h v_{J \ I} from the LASSO Gram at stepsize h (J = I + epsilon h); tends to rho.
Vec lasso_finite_h_shift(const ObservationSpace& space, const SpikeMeasure& m0, const Eigen::VectorXi& epsilon,
                         double h);
/// -gamma3 h^3 epsilon .* (G^{-1} 1)_{third block}; tends to rho for the C-BP.
Vec cbp_finite_h_shift(const ObservationSpace& space, const SpikeMeasure& m0, const Eigen::VectorXi& epsilon,
                       double h);

}  // namespace certiscope
