#pragma once

#include "certiscope/harness/artifacts.hpp"
#include "certiscope/harness/config.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace certiscope::harness {

struct CommandResult {
  std::string command;
  std::vector<FigureArtifact> artifacts;
  nlohmann::json summary = nlohmann::json::object();
  std::vector<std::string> failures;  ///< failed internal assertions

  bool ok() const { return failures.empty(); }
};

CommandResult cmd_certificates(const CertificatesConfig& config, const std::filesystem::path& out);
CommandResult cmd_path(const PathConfig& config, const std::filesystem::path& out);
CommandResult cmd_cs_transition(const CsConfig& config, const std::filesystem::path& out);
CommandResult cmd_cs_histogram(const CsConfig& config, const std::filesystem::path& out);
CommandResult cmd_scaling(const ScalingConfig& config, const std::filesystem::path& out);
CommandResult cmd_gamma(const GammaConfig& config, const std::filesystem::path& out);
CommandResult cmd_gram_check(const GramCheckConfig& config, const std::filesystem::path& out);

struct RunOptions {
  std::string config_path;
  std::filesystem::path out_dir = "out";
  std::optional<std::uint64_t> seed;  ///< overrides master_seed of the cs commands
  Profile profile = Profile::Fast;
};

/// {"command", "ok", "failures", "error"}.
nlohmann::json failure_json(const std::string& command, const std::vector<std::string>& failures,
                            const std::string& error = {});

/// Parses and validates the config for `command` ("certificates", "path", "cs transition",
/// "cs histogram", "scaling", "gamma", "gram-check"), runs it and writes
/// <out>/<stem>_summary.json. On failure also writes <out>/failure.json.
/// Returns 0 on success, 1 on a failed assertion or runtime error, 2 on a config error.
int run_command(const std::string& command, const RunOptions& options);

}  // namespace certiscope::harness
