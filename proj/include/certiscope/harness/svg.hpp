#pragma once

#include <string>
#include <vector>

namespace certiscope::harness {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
  bool markers = false;  ///< dots instead of a polyline
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<Series> series;
  std::vector<std::string> notes;  ///< printed under the title
  std::vector<double> hlines;      ///< horizontal reference lines
};

/// Static SVG with axes, ticks and a legend (first 20 named series). Non-finite points (and non-positive
/// ones on log axes) are skipped.
std::string render_line_plot(const LinePlot& plot);

struct Histogram {
  std::string title;
  std::string x_label;
  std::vector<int> bins;
  std::vector<int> counts;
  std::vector<std::string> notes;
};

std::string render_histogram(const Histogram& hist);

}  // namespace certiscope::harness
