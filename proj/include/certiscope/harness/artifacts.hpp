#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace certiscope::harness {

/// Shortest round-trip-safe text: 17 significant digits.
std::string format_number(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> cells);
  std::string render() const;
  /// Numeric column by header name; throws std::out_of_range when absent.
  std::vector<double> column(const std::string& name) const;
  static CsvTable parse(const std::string& text);
};

std::uint64_t fnv1a64(const std::string& data);
std::string hex64(std::uint64_t v);

struct FigureArtifact {
  std::filesystem::path csv_path;
  std::filesystem::path svg_path;
  std::filesystem::path json_summary_path;
  std::string checksum;  ///< FNV-1a 64 of the CSV bytes
};

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Writes <stem>.csv, then <stem>.svg from `svg`, then <stem>.json holding `summary`
/// extended with the file names and the CSV checksum.
FigureArtifact write_figure(const std::filesystem::path& dir, const std::string& stem, const CsvTable& csv,
                            const std::string& svg, nlohmann::json summary);

}  // namespace certiscope::harness
