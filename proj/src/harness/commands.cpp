#include "certiscope/harness/commands.hpp"

#include "certiscope/cone_lasso.hpp"
#include "certiscope/errors.hpp"
#include "certiscope/harness/svg.hpp"
#include "certiscope/thin_grid.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>

namespace certiscope::harness {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Gaussian kernels need quadrature fine enough for the finest grid.
ObservationSpace make_space(const KernelConfig& k, int finest_P) {
  TorusKernel kernel = k.build();
  return kernel.is_ideal() ? ObservationSpace(kernel) : ObservationSpace::for_grid(kernel, finest_P);
}

std::string fmt(double v) { return format_number(v); }

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json report_json(const NondegeneracyReport& r) {
  return {{"holds", r.holds},
          {"max_off_spike", r.max_off_spike},
          {"argmax_off_spike", r.argmax_off_spike},
          {"window_max", r.window_max},
          {"exclusion_radius", r.exclusion_radius},
          {"curvature", r.curvature},
          {"fourth", r.fourth},
          {"min_curvature", r.min_curvature}};
}

json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json ivec_json(const Eigen::VectorXi& v) { return std::vector<int>(v.data(), v.data() + v.size()); }

json signed_json(const SignedSupport& s) {
  json out = json::array();
  for (const auto& e : s.entries()) out.push_back({e.index, e.sign});
  return out;
}

json updown_json(const UpDownSupport& s) { return {{"up", s.up}, {"down", s.down}}; }

json spikes_json(const std::vector<double>& positions, const std::vector<double>& amplitudes) {
  return {{"positions", positions}, {"amplitudes", amplitudes}};
}

json ensemble_json(const EnsembleConfig& e) {
  return {{"P", e.P},
          {"Q", e.Q},
          {"s", e.s},
          {"trials", e.trials},
          {"master_seed", e.master_seed},
          {"amplitude_law", to_string(e.amplitude_law)}};
}

bool all_positive(const std::vector<double>& a) {
  return std::all_of(a.begin(), a.end(), [](double x) { return x > 0.0; });
}

// Values at every breakpoint of the indices that are ever active.
std::vector<int> ever_active(const SolutionPath& path) {
  std::set<int> idx;
  for (const auto& seg : path.segments)
    for (int i : seg.support.indices()) idx.insert(i);
  return {idx.begin(), idx.end()};
}

}  // namespace

CommandResult cmd_certificates(const CertificatesConfig& c, const fs::path& out) {
  CommandResult res;
  res.command = "certificates";
  SpikeMeasure m0 = spikes_from(c.positions, c.amplitudes);
  m0.validate();
  ObservationSpace space = make_space(c.kernel, 0);

  VanishingPrecertificate vp = [&] {
    try {
      return vanishing_precertificate(space, m0);
    } catch (const RankDeficiencyError& e) {
      throw RankDeficiencyError(std::string("vanishing precertificate: ") + e.what());
    }
  }();
  NondegeneracyReport ndsc = check_certificate_nondegeneracy(vp.eta, m0, c.scan_points, false, false);

  const bool positive = all_positive(c.amplitudes);
  std::optional<ThirdDerivativePrecertificate> tp;
  std::optional<NondegeneracyReport> tndsc;
  if (positive) {
    try {
      tp = third_derivative_precertificate(space, m0);
    } catch (const RankDeficiencyError& e) {
      throw RankDeficiencyError(std::string("third-derivative precertificate: ") + e.what());
    }
    tndsc = check_certificate_nondegeneracy(tp->mu, m0, c.scan_points, true, true);
  }

  Vec s = m0.signs();
  double interp = 0.0;
  for (size_t nu = 0; nu < m0.size(); ++nu) {
    const double x = m0.positions[nu];
    interp = std::max({interp, std::abs(vp.eta(x) - s(static_cast<Eigen::Index>(nu))), std::abs(vp.eta(x, 1))});
    if (tp) interp = std::max({interp, std::abs(tp->mu(x) - 1.0), std::abs(tp->mu(x, 1)), std::abs(tp->mu(x, 3))});
  }
  if (interp > 1e-9) res.failures.push_back("interpolation constraints violated by " + fmt(interp));
  const double scale_v = std::max(1.0, vp.eta.q().norm());
  if (vp.formula_gap > 1e-9 * scale_v) res.failures.push_back("vanishing forms disagree by " + fmt(vp.formula_gap));
  if (tp && tp->formula_gap > 1e-9 * std::max(1.0, tp->mu.q().norm()))
    res.failures.push_back("third-derivative forms disagree by " + fmt(tp->formula_gap));

  std::vector<double> ts(static_cast<size_t>(c.samples));
  for (int k = 0; k < c.samples; ++k) ts[static_cast<size_t>(k)] = static_cast<double>(k) / c.samples;
  Vec ev = vp.eta.sample(ts);
  Vec mv = tp ? tp->mu.sample(ts) : Vec();

  CsvTable csv;
  csv.header = {"t", "eta_v"};
  if (tp) csv.header.push_back("mu_t");
  for (size_t k = 0; k < ts.size(); ++k) {
    std::vector<std::string> row{fmt(ts[k]), fmt(ev(static_cast<Eigen::Index>(k)))};
    if (tp) row.push_back(fmt(mv(static_cast<Eigen::Index>(k))));
    csv.add_row(std::move(row));
  }

  LinePlot plot;
  plot.title = "Vanishing-derivative and third-derivative precertificates";
  plot.x_label = "t";
  plot.y_label = "value";
  plot.series.push_back({"eta_V", ts, std::vector<double>(ev.data(), ev.data() + ev.size())});
  if (tp) plot.series.push_back({"mu_T", ts, std::vector<double>(mv.data(), mv.data() + mv.size())});
  plot.series.push_back({"spikes", c.positions, std::vector<double>(s.data(), s.data() + s.size()), false, true});
  plot.hlines = {1.0, -1.0};
  plot.notes.push_back(std::string("NDSC ") + (ndsc.holds ? "holds" : "fails"));
  if (tndsc) plot.notes.back() += std::string(", TNDSC ") + (tndsc->holds ? "holds" : "fails");

  json summary = {{"command", res.command},
                  {"kernel", c.kernel.to_json()},
                  {"spikes", spikes_json(c.positions, c.amplitudes)},
                  {"samples", c.samples},
                  {"scan_points", c.scan_points},
                  {"ndsc", report_json(ndsc)},
                  {"vanishing_formula_gap", vp.formula_gap},
                  {"interpolation_error", interp}};
  summary["tndsc"] = tndsc ? report_json(*tndsc) : json(nullptr);
  summary["third_derivative_formula_gap"] = tp ? json(tp->formula_gap) : json(nullptr);
  res.summary = summary;
  res.artifacts.push_back(write_figure(out, "certificates", csv, render_line_plot(plot), summary));
  return res;
}

CommandResult cmd_path(const PathConfig& c, const fs::path& out) {
  CommandResult res;
  res.command = "path";
  SpikeMeasure m0 = spikes_from(c.positions, c.amplitudes);
  m0.validate();
  GridSpec grid{c.P};
  ObservationSpace space = make_space(c.kernel, c.P);
  std::vector<int> idx = spike_grid_indices(m0, grid);
  GridOperators g = build_thin_grid(space, grid);
  Vec a0 = Vec::Zero(c.P);
  for (size_t nu = 0; nu < m0.size(); ++nu) a0(idx[nu]) = m0.amplitudes[nu];
  Vec y0 = g.op.phi * a0;
  const double amax = a0.cwiseAbs().maxCoeff();

  json summary = {{"command", res.command},
                  {"kernel", c.kernel.to_json()},
                  {"spikes", spikes_json(c.positions, c.amplitudes)},
                  {"P", c.P},
                  {"lambda_min_rel", c.lambda_min_rel},
                  {"spike_indices", idx}};

  // LASSO
  {
    const double lmax = (g.op.phi.transpose() * y0).cwiseAbs().maxCoeff();
    SolutionPath path = lasso_homotopy(g.op.phi, y0, c.lambda_min_rel * lmax);
    ExtendedSupportPrediction pred = predict_extended_support_lasso(space, m0, grid);
    PathDiagnostics d = lasso_path_diagnostics(path, pred.lasso);
    const double endpoint = (path.lowest().offset - a0).cwiseAbs().maxCoeff() / amax;
    json js = {{"segments", d.segments},
               {"hypothesis_ok", pred.hypothesis_ok},
               {"failed_hypotheses", pred.failed_hypotheses},
               {"rho", vec_json(pred.shift.rho)},
               {"epsilon", ivec_json(pred.shift.epsilon)},
               {"predicted", signed_json(pred.lasso)},
               {"lowest_support", signed_json(path.lowest().support)},
               {"lowest_matches_prediction", d.lowest_matches},
               {"lambda0", d.lambda0},
               {"endpoint_error_rel", endpoint}};
    summary["lasso"] = js;
    if (pred.hypothesis_ok && !d.lowest_matches)
      res.failures.push_back("lasso: lowest segment support differs from the prediction");
    if (d.lowest_matches && endpoint > 1e-8) res.failures.push_back("lasso: endpoint misses a0 by " + fmt(endpoint));

    CsvTable csv;
    csv.header = {"lambda", "index", "position", "a"};
    LinePlot plot;
    plot.title = "LASSO path";
    plot.x_label = "lambda";
    plot.y_label = "a_i";
    plot.log_x = true;
    for (int i : ever_active(path)) {
      Series se{"i=" + std::to_string(i), {}, {}};
      for (double lam : path.breakpoints) {
        double v = path.evaluate(lam)(i);
        csv.add_row({fmt(lam), std::to_string(i), fmt(grid.point(i)), fmt(v)});
        se.x.push_back(lam);
        se.y.push_back(v);
      }
      plot.series.push_back(std::move(se));
    }
    plot.notes.push_back("lambda0 = " + fmt(d.lambda0) + (d.lowest_matches ? ", prediction matched" : ", no match"));
    res.artifacts.push_back(write_figure(out, "path_lasso", csv, render_line_plot(plot), js));
  }

  // C-BP
  if (all_positive(c.amplitudes)) {
    const double h = grid.h();
    const double lmax = (g.cone.transpose() * y0).maxCoeff();
    SolutionPath path = positive_lasso_homotopy(g.cone, y0, c.lambda_min_rel * lmax);
    ExtendedSupportPrediction pred = predict_extended_support_cbp(space, m0, grid);
    PathDiagnostics d = cbp_path_diagnostics(path, pred.cbp);
    PositivePair uv = split_stacked(path.lowest().offset);
    ConePair pair = hh_map(uv.u.cwiseMax(0.0), uv.v.cwiseMax(0.0), h);
    const double endpoint =
        std::max((pair.a - a0).cwiseAbs().maxCoeff(), pair.b.cwiseAbs().maxCoeff() / h) / amax;
    json recovered = json::array();
    for (const auto& r : recover_measure(pair, 1e-12 * amax))
      recovered.push_back({{"grid_index", r.grid_index}, {"position", r.position}, {"amplitude", r.amplitude}});
    json js = {{"segments", d.segments},
               {"hypothesis_ok", pred.hypothesis_ok},
               {"failed_hypotheses", pred.failed_hypotheses},
               {"rho", vec_json(pred.shift.rho)},
               {"epsilon", ivec_json(pred.shift.epsilon)},
               {"predicted", updown_json(pred.cbp)},
               {"lowest_matches_prediction", d.lowest_matches},
               {"lambda0", d.lambda0},
               {"endpoint_error_rel", endpoint},
               {"recovered_at_zero", recovered}};
    summary["cbp"] = js;
    if (pred.hypothesis_ok && !d.lowest_matches)
      res.failures.push_back("cbp: lowest segment support differs from the prediction");
    if (d.lowest_matches && endpoint > 1e-8) res.failures.push_back("cbp: endpoint misses a0 by " + fmt(endpoint));

    std::set<int> cells;
    for (int k : ever_active(path)) cells.insert(k % c.P);
    CsvTable csv;
    csv.header = {"lambda", "index", "position", "a", "b"};
    LinePlot plot;
    plot.title = "C-BP path";
    plot.x_label = "lambda";
    plot.y_label = "a_i (solid), 2 b_i / h (dashed)";
    plot.log_x = true;
    std::vector<Series> dashed;
    for (int i : cells) {
      Series sa{"i=" + std::to_string(i), {}, {}};
      Series sb{"", {}, {}, true};
      for (double lam : path.breakpoints) {
        PositivePair x = split_stacked(path.evaluate(lam));
        double a = x.u(i) + x.v(i), b = 0.5 * h * (x.u(i) - x.v(i));
        csv.add_row({fmt(lam), std::to_string(i), fmt(grid.point(i)), fmt(a), fmt(b)});
        sa.x.push_back(lam);
        sa.y.push_back(a);
        sb.x.push_back(lam);
        sb.y.push_back(2.0 * b / h);
      }
      plot.series.push_back(std::move(sa));
      dashed.push_back(std::move(sb));
    }
    for (auto& se : dashed) plot.series.push_back(std::move(se));
    plot.notes.push_back("lambda0 = " + fmt(d.lambda0) + (d.lowest_matches ? ", prediction matched" : ", no match"));
    res.artifacts.push_back(write_figure(out, "path_cbp", csv, render_line_plot(plot), js));
    summary["cbp_lambda0_below_lasso"] = d.lambda0 < summary["lasso"]["lambda0"].get<double>();
  } else {
    summary["cbp"] = nullptr;
  }
  res.summary = summary;
  return res;
}

CommandResult cmd_cs_transition(const CsConfig& c, const fs::path& out) {
  CommandResult res;
  res.command = "cs transition";
  TransitionCurve curve = run_transition(c.ensemble, c.s_values);
  const bool monotone = monotone_within_se(curve);
  if (!monotone) res.failures.push_back("identifiability curve rises by more than 3 standard errors");
  for (const auto& v : curve.violations) res.failures.push_back("Fuchs-valid but not identifiable: " + v);

  CsvTable csv;
  csv.header = {"s", "trials", "p_identifiable", "se_ident", "p_fuchs", "se_fuchs"};
  std::vector<double> xs;
  for (size_t k = 0; k < curve.s_values.size(); ++k) {
    csv.add_row({std::to_string(curve.s_values[k]), std::to_string(curve.trials), fmt(curve.p_identifiable[k]),
                 fmt(curve.se_ident[k]), fmt(curve.p_fuchs[k]), fmt(curve.se_fuchs[k])});
    xs.push_back(curve.s_values[k]);
  }
  const double s0 = crossing_half(curve.s_values, curve.p_fuchs);
  const double s1 = crossing_half(curve.s_values, curve.p_identifiable);

  LinePlot plot;
  plot.title = "Compressed sensing: probability against sparsity";
  plot.x_label = "s";
  plot.y_label = "probability";
  plot.series.push_back({"identifiable", xs, curve.p_identifiable});
  plot.series.push_back({"Fuchs valid", xs, curve.p_fuchs, true});
  plot.hlines = {0.5};
  plot.notes.push_back("P=" + std::to_string(c.ensemble.P) + " Q=" + std::to_string(c.ensemble.Q) +
                       " trials=" + std::to_string(curve.trials));

  json summary = {{"command", res.command},
                  {"ensemble", ensemble_json(c.ensemble)},
                  {"s_values", c.s_values},
                  {"fuchs_crossing_half", nullable(s0)},
                  {"identifiability_crossing_half", nullable(s1)},
                  {"monotone_within_3se", monotone},
                  {"fuchs_implies_identifiable_violations", curve.violations.size()}};
  res.summary = summary;
  res.artifacts.push_back(write_figure(out, "cs_transition", csv, render_line_plot(plot), summary));
  return res;
}

CommandResult cmd_cs_histogram(const CsConfig& c, const fs::path& out) {
  CommandResult res;
  res.command = "cs histogram";
  SupportSizeHistogram hist = run_support_histogram(c.ensemble);
  for (const auto& v : hist.violations) res.failures.push_back(v);

  CsvTable csv;
  csv.header = {"s", "J_size", "count"};
  Histogram fig;
  fig.title = "Extended support size, s = " + std::to_string(hist.s);
  fig.x_label = "|J|";
  int above = 0;
  for (const auto& [size, count] : hist.counts) {
    csv.add_row({std::to_string(hist.s), std::to_string(size), std::to_string(count)});
    fig.bins.push_back(size);
    fig.counts.push_back(count);
    if (size > hist.s) above += count;
  }
  const double frac = hist.identifiable > 0 ? static_cast<double>(above) / hist.identifiable : 0.0;
  fig.notes.push_back(std::to_string(hist.identifiable) + " identifiable, " + std::to_string(hist.excluded) +
                      " excluded");

  json summary = {{"command", res.command},
                  {"ensemble", ensemble_json(c.ensemble)},
                  {"identifiable", hist.identifiable},
                  {"excluded", hist.excluded},
                  {"min_size", hist.counts.empty() ? json(nullptr) : json(hist.counts.begin()->first)},
                  {"fraction_above_s", frac},
                  {"violations", hist.violations.size()}};
  res.summary = summary;
  res.artifacts.push_back(write_figure(out, "cs_histogram", csv, render_histogram(fig), summary));
  return res;
}

CommandResult cmd_scaling(const ScalingConfig& c, const fs::path& out) {
  CommandResult res;
  res.command = "scaling";
  SpikeMeasure m0 = spikes_from(c.positions, c.amplitudes);
  const int finest = *std::max_element(c.grids.begin(), c.grids.end());
  ObservationSpace space = make_space(c.kernel, finest);
  ScalingProbeResult probe = scaling_probe_lambda0(space, m0, c.grids, c.variant);

  CsvTable csv;
  csv.header = {"P", "h", "lambda0", "max_slope"};
  std::vector<double> hs, l0;
  for (const auto& r : probe.rows) {
    csv.add_row({std::to_string(r.P), fmt(r.h), fmt(r.lambda0), fmt(r.max_slope)});
    hs.push_back(r.h);
    l0.push_back(r.lambda0);
  }
  // least-squares line through the log-log points
  double mx = 0, my = 0;
  for (size_t k = 0; k < hs.size(); ++k) {
    mx += std::log(hs[k]) / hs.size();
    my += std::log(l0[k]) / hs.size();
  }
  std::vector<double> fit;
  for (double h : hs) fit.push_back(std::exp(my + probe.slope * (std::log(h) - mx)));

  const bool lasso = c.variant == Variant::Lasso;
  const double lo = lasso ? 0.7 : 2.5, hi = lasso ? 1.3 : 3.5;
  LinePlot plot;
  plot.title = std::string("lambda0 against h (") + to_string(c.variant) + ")";
  plot.x_label = "h";
  plot.y_label = "lambda0";
  plot.log_x = plot.log_y = true;
  plot.series.push_back({"lambda0", hs, l0, false, true});
  plot.series.push_back({"fit", hs, fit, true});
  plot.notes.push_back("fitted slope = " + fmt(probe.slope));

  json summary = {{"command", res.command},
                  {"kernel", c.kernel.to_json()},
                  {"spikes", spikes_json(c.positions, c.amplitudes)},
                  {"grids", c.grids},
                  {"variant", to_string(c.variant)},
                  {"slope", probe.slope},
                  {"lipschitz_slope", probe.lipschitz_slope},
                  {"expected_slope_range", {lo, hi}},
                  {"slope_in_expected_range", probe.slope >= lo && probe.slope <= hi}};
  res.summary = summary;
  res.artifacts.push_back(write_figure(out, std::string("scaling_") + to_string(c.variant), csv,
                                       render_line_plot(plot), summary));
  return res;
}

CommandResult cmd_gamma(const GammaConfig& c, const fs::path& out) {
  CommandResult res;
  res.command = "gamma";
  SpikeMeasure m0 = spikes_from(c.positions, c.amplitudes);
  m0.validate(c.variant == Variant::Cbp);
  const int finest = *std::max_element(c.grids.begin(), c.grids.end());
  ObservationSpace space = make_space(c.kernel, finest);
  Vec y = Vec::Zero(space.dim());
  for (size_t nu = 0; nu < m0.size(); ++nu) y += m0.amplitudes[nu] * space.column(m0.positions[nu]);
  const double lambda = c.lambda_rel * y.squaredNorm();
  GammaProbeResult probe = gamma_convergence_probe(space, y, lambda, c.grids, c.variant);

  CsvTable csv;
  csv.header = {"P", "h", "value"};
  std::vector<double> hs;
  for (size_t k = 0; k < probe.grid_sizes.size(); ++k) {
    csv.add_row({std::to_string(probe.grid_sizes[k]), fmt(1.0 / probe.grid_sizes[k]), fmt(probe.values[k])});
    hs.push_back(1.0 / probe.grid_sizes[k]);
  }
  const size_t n = probe.values.size();
  const double final_inc =
      n >= 2 ? std::abs(probe.values[n - 1] - probe.values[n - 2]) / std::abs(probe.values[0]) : 0.0;

  LinePlot plot;
  plot.title = std::string("Optimal value over nested grids (") + to_string(c.variant) + ")";
  plot.x_label = "h";
  plot.y_label = "optimal value";
  plot.log_x = true;
  plot.series.push_back({"value", hs, probe.values});
  plot.notes.push_back("final relative increment = " + fmt(final_inc));

  json summary = {{"command", res.command},
                  {"kernel", c.kernel.to_json()},
                  {"spikes", spikes_json(c.positions, c.amplitudes)},
                  {"variant", to_string(c.variant)},
                  {"lambda", lambda},
                  {"grids", c.grids},
                  {"values", probe.values},
                  {"non_increasing", probe.non_increasing},
                  {"cauchy", probe.cauchy},
                  {"final_increment_rel", final_inc}};
  res.summary = summary;
  res.artifacts.push_back(write_figure(out, std::string("gamma_") + to_string(c.variant), csv,
                                       render_line_plot(plot), summary));
  return res;
}

CommandResult cmd_gram_check(const GramCheckConfig& c, const fs::path& out) {
  CommandResult res;
  res.command = "gram-check";
  const double hmin = *std::min_element(c.h_list.begin(), c.h_list.end());
  ObservationSpace space = make_space(c.kernel, static_cast<int>(std::lround(1.0 / hmin)));
  Vec signs = Eigen::Map<const Vec>(c.signs.data(), static_cast<Eigen::Index>(c.signs.size()));
  SpikeMeasure m0 = spikes_from(c.positions, c.signs);
  NaturalShift shift = c.variant == Variant::Lasso ? natural_shift_lasso(space, m0) : natural_shift_cbp(space, m0);
  std::vector<GramCheckRow> rows = gram_expansion_check(space, c.positions, signs, c.h_list, c.variant);

  CsvTable csv;
  csv.header = {"h", "residual", "leading", "ratio", "rank_ok"};
  std::vector<double> hs, ratios;
  json notes = json::array();
  for (const auto& r : rows) {
    csv.add_row({fmt(r.h), fmt(r.residual), fmt(r.leading), fmt(r.ratio), r.rank_ok ? "1" : "0"});
    if (r.rank_ok) {
      hs.push_back(r.h);
      ratios.push_back(r.ratio);
    } else {
      notes.push_back({{"h", r.h}, {"note", r.note}});
    }
  }
  // ratios follow the rank-ok rows in order of decreasing h
  std::vector<size_t> order(hs.size());
  for (size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return hs[a] > hs[b]; });
  bool decreasing = true;
  for (size_t k = 1; k < order.size(); ++k)
    if (!(ratios[order[k]] < ratios[order[k - 1]])) decreasing = false;
  if (!decreasing) res.failures.push_back("residual ratios do not decrease as h halves");

  LinePlot plot;
  plot.title = std::string("Inverse Gram expansion residual (") + to_string(c.variant) + ")";
  plot.x_label = "h";
  plot.y_label = "residual * h^k";
  plot.log_x = plot.log_y = true;
  plot.series.push_back({"ratio", hs, ratios, false, true});

  json summary = {{"command", res.command},
                  {"kernel", c.kernel.to_json()},
                  {"positions", c.positions},
                  {"signs", c.signs},
                  {"variant", to_string(c.variant)},
                  {"rho", vec_json(shift.rho)},
                  {"epsilon", ivec_json(shift.epsilon)},
                  {"ratios_decreasing", decreasing},
                  {"rank_failures", notes}};
  res.summary = summary;
  res.artifacts.push_back(write_figure(out, std::string("gram_check_") + to_string(c.variant), csv,
                                       render_line_plot(plot), summary));
  return res;
}

json failure_json(const std::string& command, const std::vector<std::string>& failures, const std::string& error) {
  json j = {{"command", command}, {"ok", false}, {"failures", failures}};
  if (!error.empty()) j["error"] = error;
  return j;
}

int run_command(const std::string& command, const RunOptions& o) {
  const fs::path failure_path = o.out_dir / "failure.json";
  auto fail = [&](const std::vector<std::string>& failures, const std::string& error, int code) {
    json j = failure_json(command, failures, error);
    std::cerr << j.dump() << "\n";
    try {
      write_text(failure_path, j.dump(2) + "\n");
    } catch (const std::exception&) {
    }
    return code;
  };

  std::string stem = command;
  std::replace(stem.begin(), stem.end(), ' ', '_');
  std::replace(stem.begin(), stem.end(), '-', '_');

  CommandResult res;
  try {
    json cfg = load_config_file(o.config_path);
    if (command == "certificates") {
      auto c = parse_certificates(cfg, o.profile);
      res = cmd_certificates(c, o.out_dir);
    } else if (command == "path") {
      auto c = parse_path(cfg, o.profile);
      res = cmd_path(c, o.out_dir);
    } else if (command == "cs transition" || command == "cs histogram") {
      const bool tr = command == "cs transition";
      CsConfig c = tr ? parse_cs_transition(cfg, o.profile) : parse_cs_histogram(cfg, o.profile);
      if (o.seed) c.ensemble.master_seed = *o.seed;
      res = tr ? cmd_cs_transition(c, o.out_dir) : cmd_cs_histogram(c, o.out_dir);
    } else if (command == "scaling") {
      auto c = parse_scaling(cfg, o.profile);
      res = cmd_scaling(c, o.out_dir);
    } else if (command == "gamma") {
      auto c = parse_gamma(cfg, o.profile);
      res = cmd_gamma(c, o.out_dir);
    } else if (command == "gram-check") {
      auto c = parse_gram_check(cfg, o.profile);
      res = cmd_gram_check(c, o.out_dir);
    } else {
      throw ConfigError("unknown command '" + command + "'");
    }
  } catch (const ConfigError& e) {
    return fail({}, std::string("config: ") + e.what(), 2);
  } catch (const std::exception& e) {
    return fail({}, command + ": " + e.what(), 1);
  }

  json summary = res.summary;
  summary["profile"] = to_string(o.profile);
  summary["ok"] = res.ok();
  summary["failures"] = res.failures;
  json arts = json::array();
  for (const auto& a : res.artifacts)
    arts.push_back({{"csv", a.csv_path.string()},
                    {"svg", a.svg_path.string()},
                    {"json", a.json_summary_path.string()},
                    {"checksum", a.checksum}});
  summary["artifacts"] = arts;
  write_text(o.out_dir / (stem + "_summary.json"), summary.dump(2) + "\n");
  std::cout << summary.dump(2) << "\n";
  if (!res.ok()) return fail(res.failures, {}, 1);
  std::error_code ec;
  fs::remove(failure_path, ec);
  return 0;
}

}  // namespace certiscope::harness
