#pragma once

// Minimal deterministic SVG output: a log-log scatter with fitted lines and
// an equirectangular heat map.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace composita::svg {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

struct Series {
  std::string label;
  std::string color;
  std::vector<double> x, y;  // positive values
  bool has_fit = false;
  double slope = 0.0, intercept = 0.0;  // log y = intercept + slope log x
};

inline std::string loglog_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                               const std::vector<Series>& series, const std::string& comment = "") {
  const double w = 640, h = 440, ml = 70, mr = 20, mt = 40, mb = 60;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.x[i] > 0 && s.y[i] > 0)) continue;
      x0 = std::min(x0, std::log10(s.x[i]));
      x1 = std::max(x1, std::log10(s.x[i]));
      y0 = std::min(y0, std::log10(s.y[i]));
      y1 = std::max(y1, std::log10(s.y[i]));
    }
  if (!(x0 <= x1)) x0 = 0, x1 = 1;
  if (!(y0 <= y1)) y0 = 0, y1 = 1;
  x0 = std::floor(x0 * 10) / 10 - 0.05, x1 = std::ceil(x1 * 10) / 10 + 0.05;
  y0 = std::floor(y0), y1 = std::ceil(y1);
  if (y1 - y0 < 1) y1 = y0 + 1;
  auto px = [&](double lx) { return ml + (lx - x0) / (x1 - x0) * (w - ml - mr); };
  auto py = [&](double ly) { return h - mb - (ly - y0) / (y1 - y0) * (h - mt - mb); };

  std::string o = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (!comment.empty()) o += "<!-- " + comment + " -->\n";
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o += "<text x=\"" + num(w / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + escape(title) + "</text>\n";
  o += "<rect x=\"" + num(ml) + "\" y=\"" + num(mt) + "\" width=\"" + num(w - ml - mr) + "\" height=\"" + num(h - mt - mb) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double d = std::ceil(y0); d <= y1 + 1e-9; d += 1) {
    o += "<line x1=\"" + num(ml) + "\" x2=\"" + num(w - mr) + "\" y1=\"" + num(py(d)) + "\" y2=\"" + num(py(d)) + "\" stroke=\"#ddd\"/>\n";
    o += "<text x=\"" + num(ml - 6) + "\" y=\"" + num(py(d) + 4) + "\" text-anchor=\"end\">1e" + num(d) + "</text>\n";
  }
  if (!series.empty())
    for (double xv : series.front().x)
      o += "<text x=\"" + num(px(std::log10(xv))) + "\" y=\"" + num(h - mb + 16) + "\" text-anchor=\"middle\">" + num(xv) + "</text>\n";
  o += "<text x=\"" + num(w / 2) + "\" y=\"" + num(h - 14) + "\" text-anchor=\"middle\">" + escape(xlabel) + "</text>\n";
  o += "<text transform=\"translate(16," + num(h / 2) + ") rotate(-90)\" text-anchor=\"middle\">" + escape(ylabel) + "</text>\n";

  double legend_y = mt + 16;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.x[i] > 0 && s.y[i] > 0)) continue;
      o += "<circle cx=\"" + num(px(std::log10(s.x[i]))) + "\" cy=\"" + num(py(std::log10(s.y[i]))) + "\" r=\"3\" fill=\"" + s.color + "\"/>\n";
    }
    std::string label = s.label;
    if (s.has_fit && !s.x.empty()) {
      const double a = *std::min_element(s.x.begin(), s.x.end()), b = *std::max_element(s.x.begin(), s.x.end());
      const double la = std::log10(a), lb = std::log10(b);
      const double ya = (s.intercept + s.slope * std::log(a)) / std::log(10.0);
      const double yb = (s.intercept + s.slope * std::log(b)) / std::log(10.0);
      o += "<line x1=\"" + num(px(la)) + "\" y1=\"" + num(py(ya)) + "\" x2=\"" + num(px(lb)) + "\" y2=\"" + num(py(yb)) +
           "\" stroke=\"" + s.color + "\" stroke-width=\"1.5\"/>\n";
      label += " (slope " + num(s.slope) + ")";
    }
    o += "<rect x=\"" + num(w - mr - 230) + "\" y=\"" + num(legend_y - 9) + "\" width=\"10\" height=\"10\" fill=\"" + s.color + "\"/>\n";
    o += "<text x=\"" + num(w - mr - 214) + "\" y=\"" + num(legend_y) + "\">" + escape(label) + "</text>\n";
    legend_y += 18;
  }
  o += "</svg>\n";
  return o;
}

/// Diverging blue-white-red color for v in [-1, 1].
inline std::string diverging(double v) {
  v = std::clamp(v, -1.0, 1.0);
  int r, g, b;
  if (v >= 0) {
    r = 255;
    g = b = static_cast<int>(std::lround(255 * (1 - v)));
  } else {
    b = 255;
    r = g = static_cast<int>(std::lround(255 * (1 + v)));
  }
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

struct HeatPanel {
  std::string title;
  std::vector<std::vector<double>> values;  // rows: latitude from north, cols: longitude
};

/// Side-by-side heat maps, each scaled symmetrically by its own max |value|.
inline std::string heat_maps(const std::vector<HeatPanel>& panels, const std::string& comment = "") {
  const double cell = 3, gap = 30, top = 40;
  double width = gap;
  for (const auto& p : panels) width += (p.values.empty() ? 0 : p.values[0].size()) * cell + gap;
  double height = top + 50;
  for (const auto& p : panels) height = std::max(height, top + p.values.size() * cell + 40);

  std::string o = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (!comment.empty()) o += "<!-- " + comment + " -->\n";
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" + num(height) +
       "\" font-family=\"sans-serif\" font-size=\"12\" shape-rendering=\"crispEdges\">\n";
  o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  double x = gap;
  for (const auto& p : panels) {
    double scale = 0;
    for (const auto& row : p.values)
      for (double v : row) scale = std::max(scale, std::abs(v));
    if (scale == 0) scale = 1;
    const std::size_t cols = p.values.empty() ? 0 : p.values[0].size();
    o += "<text x=\"" + num(x + cols * cell / 2) + "\" y=\"24\" text-anchor=\"middle\">" + escape(p.title) + "</text>\n";
    for (std::size_t i = 0; i < p.values.size(); ++i)
      for (std::size_t j = 0; j < p.values[i].size(); ++j)
        o += "<rect x=\"" + num(x + j * cell) + "\" y=\"" + num(top + i * cell) + "\" width=\"" + num(cell) + "\" height=\"" +
             num(cell) + "\" fill=\"" + diverging(p.values[i][j] / scale) + "\"/>\n";
    o += "<text x=\"" + num(x) + "\" y=\"" + num(top + p.values.size() * cell + 18) + "\">max |value| " + num(scale) + "</text>\n";
    x += cols * cell + gap;
  }
  o += "</svg>\n";
  return o;
}

}  // namespace composita::svg
