#pragma once

#include "certiscope/abstract_lasso.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace certiscope {

enum class AmplitudeLaw { UnitSigned, GaussianAmp };

const char* to_string(AmplitudeLaw law);
/// Throws DomainError on an unknown name.
AmplitudeLaw amplitude_law_from_string(const std::string& name);

struct EnsembleConfig {
  int P = 400;
  int Q = 100;
  int s = 1;
  int trials = 200;
  std::uint64_t master_seed = 0;
  AmplitudeLaw amplitude_law = AmplitudeLaw::UnitSigned;

  /// 0 <= s <= P, 1 <= Q <= P, trials >= 1.
  void validate() const;
};

struct CsInstance {
  Mat op;  ///< Q x P, i.i.d. N(0, 1)
  Vec a0;  ///< exactly s nonzeros
};

/// Pure function of (master_seed, trial_index) for the matrix; the support and
/// amplitudes also depend on s.
CsInstance sample_instance(const EnsembleConfig& config, std::uint64_t trial_index);

struct TrialOutcome {
  Identifiability verdict = Identifiability::Ambiguous;
  bool fuchs_valid = false;
  int extended_size = -1;  ///< |J| when identifiable
};

TrialOutcome run_trial(const EnsembleConfig& config, std::uint64_t trial_index);

struct TransitionCurve {
  std::vector<int> s_values;
  std::vector<double> p_identifiable;
  std::vector<double> se_ident;
  std::vector<double> p_fuchs;
  std::vector<double> se_fuchs;
  int trials = 0;
  /// Trials where the Fuchs precertificate is valid but the verdict is not identifiable.
  std::vector<std::string> violations;
};

TransitionCurve run_transition(const EnsembleConfig& config, const std::vector<int>& s_values);

/// p_identifiable never rises by more than `k` combined standard errors from one s to the next.
bool monotone_within_se(const TransitionCurve& curve, double k = 3.0);

/// First s where the curve drops below 0.5, linearly interpolated; NaN when it never does.
double crossing_half(const std::vector<int>& s_values, const std::vector<double>& p);

struct SupportSizeHistogram {
  int s = 0;
  std::map<int, int> counts;  ///< |J| -> count over identifiable trials
  int identifiable = 0;
  int excluded = 0;
  /// Trials with |J| < s, or Fuchs-valid trials with |J| != s.
  std::vector<std::string> violations;
};

SupportSizeHistogram run_support_histogram(const EnsembleConfig& config);

}  // namespace certiscope
