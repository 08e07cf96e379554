#include "certiscope/harness/artifacts.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace certiscope::harness {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header.size()) throw std::invalid_argument("CSV row width does not match the header");
  rows.push_back(std::move(cells));
}

std::string CsvTable::render() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

std::vector<double> CsvTable::column(const std::string& name) const {
  for (size_t c = 0; c < header.size(); ++c) {
    if (header[c] != name) continue;
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(std::stod(r[c]));
    return out;
  }
  throw std::out_of_range("no CSV column '" + name + "'");
}

CsvTable CsvTable::parse(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      t.add_row(std::move(cells));
    }
  }
  return t;
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

FigureArtifact write_figure(const std::filesystem::path& dir, const std::string& stem, const CsvTable& csv,
                            const std::string& svg, nlohmann::json summary) {
  FigureArtifact a;
  a.csv_path = dir / (stem + ".csv");
  a.svg_path = dir / (stem + ".svg");
  a.json_summary_path = dir / (stem + ".json");
  const std::string text = csv.render();
  a.checksum = hex64(fnv1a64(text));
  write_text(a.csv_path, text);
  write_text(a.svg_path, svg);
  summary["csv"] = a.csv_path.filename().string();
  summary["svg"] = a.svg_path.filename().string();
  summary["csv_checksum_fnv1a64"] = a.checksum;
  write_text(a.json_summary_path, summary.dump(2) + "\n");
  return a;
}

}  // namespace certiscope::harness
