#include "certiscope/harness/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace certiscope::harness {

namespace {

constexpr double kW = 720, kH = 480, kL = 80, kR = 170, kT = 60, kB = 60;
constexpr size_t kLegendMax = 20;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else if (c == '"') out += "&quot;";
    else out += c;
  }
  return out;
}

struct Axis {
  double lo = 0, hi = 1;
  bool log = false;

  double map(double v) const {
    double a = log ? std::log10(v) : v;
    return (a - lo) / (hi - lo);
  }
  bool usable(double v) const { return std::isfinite(v) && (!log || v > 0); }
};

Axis make_axis(const std::vector<double>& vals, bool log) {
  Axis a;
  a.log = log;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : vals) {
    if (!a.usable(v)) continue;
    double t = log ? std::log10(v) : v;
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  if (!std::isfinite(lo)) lo = 0, hi = 1;
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  double pad = 0.05 * (hi - lo);
  a.lo = log ? std::floor(lo) : lo - pad;
  a.hi = log ? std::ceil(hi) : hi + pad;
  if (a.hi - a.lo < 1e-12) a.hi = a.lo + 1;
  return a;
}

std::vector<double> ticks(const Axis& a) {
  std::vector<double> out;
  if (a.log) {
    for (double e = a.lo; e <= a.hi + 1e-9; e += 1) out.push_back(std::pow(10.0, e));
    return out;
  }
  for (int k = 0; k <= 5; ++k) out.push_back(a.lo + (a.hi - a.lo) * k / 5.0);
  return out;
}

std::string header(const std::string& title, const std::vector<std::string>& notes) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kW) + "\" height=\"" + num(kH) +
                  "\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(kW / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">" + escape(title) + "</text>\n";
  double y = 38;
  for (const auto& n : notes) {
    s += "<text x=\"" + num(kW / 2) + "\" y=\"" + num(y) + "\" text-anchor=\"middle\">" + escape(n) + "</text>\n";
    y += 14;
  }
  return s;
}

std::string frame(const Axis& ax, const Axis& ay, const std::string& xl, const std::string& yl) {
  const double pw = kW - kL - kR, ph = kH - kT - kB;
  std::string s = "<rect x=\"" + num(kL) + "\" y=\"" + num(kT) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
                  "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ticks(ax)) {
    double px = kL + ax.map(t) * pw;
    s += "<line x1=\"" + num(px) + "\" y1=\"" + num(kT + ph) + "\" x2=\"" + num(px) + "\" y2=\"" + num(kT + ph + 5) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(px) + "\" y=\"" + num(kT + ph + 18) + "\" text-anchor=\"middle\">" + num(t) + "</text>\n";
  }
  for (double t : ticks(ay)) {
    double py = kT + (1 - ay.map(t)) * ph;
    s += "<line x1=\"" + num(kL - 5) + "\" y1=\"" + num(py) + "\" x2=\"" + num(kL) + "\" y2=\"" + num(py) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(kL - 8) + "\" y=\"" + num(py + 4) + "\" text-anchor=\"end\">" + num(t) + "</text>\n";
  }
  s += "<text x=\"" + num(kL + pw / 2) + "\" y=\"" + num(kH - 15) + "\" text-anchor=\"middle\">" + escape(xl) +
       "</text>\n";
  s += "<text x=\"18\" y=\"" + num(kT + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
       num(kT + ph / 2) + ")\">" + escape(yl) + "</text>\n";
  return s;
}

}  // namespace

std::string render_line_plot(const LinePlot& plot) {
  std::vector<double> xs, ys;
  for (const auto& se : plot.series) {
    xs.insert(xs.end(), se.x.begin(), se.x.end());
    ys.insert(ys.end(), se.y.begin(), se.y.end());
  }
  ys.insert(ys.end(), plot.hlines.begin(), plot.hlines.end());
  Axis ax = make_axis(xs, plot.log_x), ay = make_axis(ys, plot.log_y);
  const double pw = kW - kL - kR, ph = kH - kT - kB;
  auto px = [&](double v) { return kL + ax.map(v) * pw; };
  auto py = [&](double v) { return kT + (1 - ay.map(v)) * ph; };

  std::string s = header(plot.title, plot.notes) + frame(ax, ay, plot.x_label, plot.y_label);
  for (double h : plot.hlines) {
    if (!ay.usable(h)) continue;
    s += "<line x1=\"" + num(kL) + "\" y1=\"" + num(py(h)) + "\" x2=\"" + num(kL + pw) + "\" y2=\"" + num(py(h)) +
         "\" stroke=\"gray\" stroke-dasharray=\"2 3\"/>\n";
  }
  for (size_t k = 0; k < plot.series.size(); ++k) {
    const Series& se = plot.series[k];
    const char* color = kColors[k % std::size(kColors)];
    std::string pts;
    for (size_t i = 0; i < se.x.size() && i < se.y.size(); ++i) {
      if (!ax.usable(se.x[i]) || !ay.usable(se.y[i])) continue;
      if (se.markers) {
        s += "<circle cx=\"" + num(px(se.x[i])) + "\" cy=\"" + num(py(se.y[i])) + "\" r=\"2.5\" fill=\"" + color +
             "\"/>\n";
      } else {
        pts += num(px(se.x[i])) + "," + num(py(se.y[i])) + " ";
      }
    }
    if (!pts.empty())
      s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\"" +
           (se.dashed ? " stroke-dasharray=\"6 4\"" : "") + " points=\"" + pts + "\"/>\n";
    if (k >= kLegendMax || se.name.empty()) continue;
    double ly = kT + 10 + 18.0 * static_cast<double>(k);
    s += "<line x1=\"" + num(kW - kR + 12) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(kW - kR + 32) + "\" y2=\"" +
         num(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + num(kW - kR + 38) + "\" y=\"" + num(ly + 4) + "\">" + escape(se.name) + "</text>\n";
  }
  return s + "</svg>\n";
}

std::string render_histogram(const Histogram& hist) {
  std::vector<double> xs, ys{0.0};
  for (int b : hist.bins) {
    xs.push_back(b - 0.5);
    xs.push_back(b + 0.5);
  }
  for (int c : hist.counts) ys.push_back(c);
  Axis ax = make_axis(xs, false), ay = make_axis(ys, false);
  ay.lo = 0;
  const double pw = kW - kL - kR, ph = kH - kT - kB;
  std::string s = header(hist.title, hist.notes) + frame(ax, ay, hist.x_label, "count");
  for (size_t i = 0; i < hist.bins.size() && i < hist.counts.size(); ++i) {
    double x0 = kL + ax.map(hist.bins[i] - 0.4) * pw, x1 = kL + ax.map(hist.bins[i] + 0.4) * pw;
    double top = kT + (1 - ay.map(hist.counts[i])) * ph;
    s += "<rect x=\"" + num(x0) + "\" y=\"" + num(top) + "\" width=\"" + num(x1 - x0) + "\" height=\"" +
         num(kT + ph - top) + "\" fill=\"#1f77b4\"/>\n";
  }
  return s + "</svg>\n";
}

}  // namespace certiscope::harness
