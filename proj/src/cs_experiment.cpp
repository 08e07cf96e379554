#include "certiscope/cs_experiment.hpp"

#include "certiscope/errors.hpp"
#include "certiscope/parallel.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

namespace certiscope {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t index, std::uint64_t salt) {
  return splitmix(splitmix(splitmix(seed) ^ index) ^ salt);
}

// mt19937_64 output is fixed by the standard; the transforms below are spelled out
// so draws do not depend on the library's distribution implementations.
double uniform_open(std::mt19937_64& g) { return (static_cast<double>(g() >> 11) + 0.5) * 0x1.0p-53; }

int uniform_below(std::mt19937_64& g, int bound) {
  const std::uint64_t b = static_cast<std::uint64_t>(bound);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % b;
  std::uint64_t r;
  do r = g();
  while (r >= limit);
  return static_cast<int>(r % b);
}

void fill_normals(std::mt19937_64& g, double* out, Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; i += 2) {
    double r = std::sqrt(-2.0 * std::log(uniform_open(g)));
    double t = 2.0 * std::numbers::pi * uniform_open(g);
    out[i] = r * std::cos(t);
    if (i + 1 < n) out[i + 1] = r * std::sin(t);
  }
}

double wald_se(double p, int n) { return n > 0 ? std::sqrt(p * (1.0 - p) / n) : 0.0; }

}  // namespace

const char* to_string(AmplitudeLaw law) { return law == AmplitudeLaw::UnitSigned ? "unit_signed" : "gaussian"; }

AmplitudeLaw amplitude_law_from_string(const std::string& name) {
  if (name == "unit_signed") return AmplitudeLaw::UnitSigned;
  if (name == "gaussian") return AmplitudeLaw::GaussianAmp;
  throw DomainError("unknown amplitude law '" + name + "'");
}

void EnsembleConfig::validate() const {
  if (P < 1 || Q < 1 || Q > P) throw DomainError("need 1 <= Q <= P");
  if (s < 0 || s > P) throw DomainError("need 0 <= s <= P");
  if (trials < 1) throw DomainError("need at least one trial");
}

CsInstance sample_instance(const EnsembleConfig& config, std::uint64_t trial_index) {
  config.validate();
  CsInstance inst;
  std::mt19937_64 mat_gen(stream_key(config.master_seed, trial_index, 1));
  inst.op.resize(config.Q, config.P);
  fill_normals(mat_gen, inst.op.data(), inst.op.size());

  std::mt19937_64 sup_gen(stream_key(config.master_seed, trial_index, 2 + static_cast<std::uint64_t>(config.s)));
  std::vector<int> perm(config.P);
  std::iota(perm.begin(), perm.end(), 0);
  for (int k = 0; k < config.s; ++k) std::swap(perm[k], perm[k + uniform_below(sup_gen, config.P - k)]);
  inst.a0 = Vec::Zero(config.P);
  for (int k = 0; k < config.s; ++k) {
    double amp;
    if (config.amplitude_law == AmplitudeLaw::UnitSigned) {
      amp = (sup_gen() >> 63) ? 1.0 : -1.0;
    } else {
      do fill_normals(sup_gen, &amp, 1);
      while (amp == 0.0);
    }
    inst.a0(perm[k]) = amp;
  }
  return inst;
}

TrialOutcome run_trial(const EnsembleConfig& config, std::uint64_t trial_index) {
  CsInstance inst = sample_instance(config, trial_index);
  TrialOutcome out;
  try {
    out.fuchs_valid = fuchs_precertificate(inst.op, SignedSupport::of(inst.a0)).valid;
  } catch (const RankDeficiencyError&) {
    out.fuchs_valid = false;
  }
  IdentifiabilityResult r = identifiability_report(inst.op, inst.a0);
  out.verdict = r.verdict;
  if (r.verdict == Identifiability::Identifiable)
    out.extended_size = r.certificate ? static_cast<int>(r.certificate->saturation.size()) : 0;
  return out;
}

TransitionCurve run_transition(const EnsembleConfig& config, const std::vector<int>& s_values) {
  config.validate();
  TransitionCurve curve;
  curve.s_values = s_values;
  curve.trials = config.trials;
  for (int s : s_values) {
    EnsembleConfig c = config;
    c.s = s;
    c.validate();
    auto outcomes = parallel_map(static_cast<std::size_t>(c.trials), [&](std::size_t t) { return run_trial(c, t); });
    int ident = 0, fuchs = 0;
    for (std::size_t t = 0; t < outcomes.size(); ++t) {
      bool ok = outcomes[t].verdict == Identifiability::Identifiable;
      ident += ok;
      fuchs += outcomes[t].fuchs_valid;
      if (outcomes[t].fuchs_valid && !ok)
        curve.violations.push_back("s=" + std::to_string(s) + " trial=" + std::to_string(t) + " verdict=" +
                                   to_string(outcomes[t].verdict));
    }
    double pi = static_cast<double>(ident) / c.trials, pf = static_cast<double>(fuchs) / c.trials;
    curve.p_identifiable.push_back(pi);
    curve.se_ident.push_back(wald_se(pi, c.trials));
    curve.p_fuchs.push_back(pf);
    curve.se_fuchs.push_back(wald_se(pf, c.trials));
  }
  return curve;
}

bool monotone_within_se(const TransitionCurve& curve, double k) {
  for (std::size_t i = 1; i < curve.p_identifiable.size(); ++i) {
    if (curve.s_values[i] < curve.s_values[i - 1]) continue;
    double rise = curve.p_identifiable[i] - curve.p_identifiable[i - 1];
    double se = std::hypot(curve.se_ident[i], curve.se_ident[i - 1]);
    // Wald errors vanish at 0 and 1, so one trial of slack stands in for them
    se = std::max(se, 1.0 / curve.trials);
    if (rise > k * se) return false;
  }
  return true;
}

double crossing_half(const std::vector<int>& s_values, const std::vector<double>& p) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] >= 0.5) continue;
    if (i == 0) return s_values[0];
    double t = (p[i - 1] - 0.5) / (p[i - 1] - p[i]);
    return s_values[i - 1] + t * (s_values[i] - s_values[i - 1]);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

SupportSizeHistogram run_support_histogram(const EnsembleConfig& config) {
  config.validate();
  SupportSizeHistogram hist;
  hist.s = config.s;
  auto outcomes =
      parallel_map(static_cast<std::size_t>(config.trials), [&](std::size_t t) { return run_trial(config, t); });
  for (std::size_t t = 0; t < outcomes.size(); ++t) {
    const auto& o = outcomes[t];
    if (o.verdict != Identifiability::Identifiable) {
      ++hist.excluded;
      continue;
    }
    ++hist.identifiable;
    ++hist.counts[o.extended_size];
    if (o.extended_size < config.s || (o.fuchs_valid && o.extended_size != config.s))
      hist.violations.push_back("trial=" + std::to_string(t) + " |J|=" + std::to_string(o.extended_size));
  }
  return hist;
}

}  // namespace certiscope
