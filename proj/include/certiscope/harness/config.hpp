#pragma once

#include "certiscope/cs_experiment.hpp"
#include "certiscope/kernel_ops.hpp"
#include "certiscope/thin_grid.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace certiscope::harness {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Profile { Fast, Full };

Profile profile_from_string(const std::string& name);
const char* to_string(Profile p);

struct KernelConfig {
  std::string kind = "ideal";  ///< "ideal" or "gaussian"
  int fc = 10;
  double sigma = 0.02;
  int wraps = 3;

  TorusKernel build() const;
  nlohmann::json to_json() const;
};

SpikeMeasure spikes_from(const std::vector<double>& positions, const std::vector<double>& amplitudes);

struct CertificatesConfig {
  KernelConfig kernel;
  std::vector<double> positions{0.453125, 0.546875};
  std::vector<double> amplitudes{1.0, 0.7};
  int samples = 2048;
  int scan_points = 16384;
};

struct PathConfig {
  KernelConfig kernel;
  std::vector<double> positions{0.453125, 0.546875};
  std::vector<double> amplitudes{1.0, 0.7};
  int P = 256;
  double lambda_min_rel = 1e-10;
};

struct CsConfig {
  EnsembleConfig ensemble;
  std::vector<int> s_values;  ///< transition only
};

struct ScalingConfig {
  KernelConfig kernel{"ideal", 3, 0.02, 3};
  std::vector<double> positions{0.296875, 0.71875};
  std::vector<double> amplitudes{1.0, 0.7};
  std::vector<int> grids{64, 128, 256, 512, 1024};
  Variant variant = Variant::Lasso;
};

struct GammaConfig {
  KernelConfig kernel{"ideal", 5, 0.02, 3};
  std::vector<double> positions{0.3, 0.61};
  std::vector<double> amplitudes{1.0, 0.8};
  double lambda_rel = 0.1;  ///< lambda = lambda_rel * ||y||^2
  std::vector<int> grids{32, 64, 128, 256, 512};
  Variant variant = Variant::Lasso;
};

struct GramCheckConfig {
  KernelConfig kernel;
  std::vector<double> positions{0.453125, 0.546875};
  std::vector<double> signs{1.0, 1.0};
  std::vector<double> h_list{1.0 / 256, 1.0 / 512, 1.0 / 1024, 1.0 / 2048, 1.0 / 4096};
  Variant variant = Variant::Lasso;
};

// Each parser starts from the profile defaults, overrides with the JSON object and
// throws ConfigError on unknown fields, wrong types or invalid values.
CertificatesConfig parse_certificates(const nlohmann::json& j, Profile p);
PathConfig parse_path(const nlohmann::json& j, Profile p);
CsConfig parse_cs_transition(const nlohmann::json& j, Profile p);
CsConfig parse_cs_histogram(const nlohmann::json& j, Profile p);
ScalingConfig parse_scaling(const nlohmann::json& j, Profile p);
GammaConfig parse_gamma(const nlohmann::json& j, Profile p);
GramCheckConfig parse_gram_check(const nlohmann::json& j, Profile p);

/// Reads a JSON file; an empty path yields an empty object.
nlohmann::json load_config_file(const std::string& path);

}  // namespace certiscope::harness
