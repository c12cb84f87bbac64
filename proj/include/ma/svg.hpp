#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "ma/field.hpp"

namespace ma {

namespace detail {

/// Diverging color map centered at zero: blue for negative, white at zero,
/// red for positive. t in [-1, 1].
inline void diverging_color(double t, int& r, int& g, int& b) {
  const int neg[3] = {5, 113, 176};
  const int mid[3] = {247, 247, 247};
  const int pos[3] = {202, 0, 32};
  const int* from = mid;
  const int* to = t < 0 ? neg : pos;
  double s = std::min(std::abs(t), 1.0);
  r = static_cast<int>(std::lround(from[0] + s * (to[0] - from[0])));
  g = static_cast<int>(std::lround(from[1] + s * (to[1] - from[1])));
  b = static_cast<int>(std::lround(from[2] + s * (to[2] - from[2])));
}

}  // namespace detail

/// Writes an SVG raster of the field: one cell per non-exterior node with a
/// finite value, diverging color map centered at 0, and a legend. The bytes
/// are a deterministic function of the input.
inline void emit_heatmap(const ScalarField& f, const std::string& path) {
  const UniformGrid& g = *f.grid;
  double vmax = 0.0;
  bool any = false;
  for (int k : g.active_nodes()) {
    double v = f.values[k];
    if (!std::isfinite(v)) continue;
    vmax = std::max(vmax, std::abs(v));
    any = true;
  }
  if (!any) throw IOError("emit_heatmap: field has no finite values");

  const int cell = std::max(1, static_cast<int>(640.0 / g.n1()));
  const int plot_w = cell * g.n1();
  const int plot_h = cell * g.n2();
  const int legend_h = 48;
  const int width = plot_w;
  const int height = plot_h + legend_h;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOError("cannot open for writing: " + path);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                "viewBox=\"0 0 %d %d\">\n",
                width, height, width, height);
  out << buf;
  std::snprintf(buf, sizeof buf,
                "<rect x=\"0\" y=\"0\" width=\"%d\" height=\"%d\" fill=\"#ffffff\"/>\n",
                width, height);
  out << buf;

  for (int k : g.active_nodes()) {
    double v = f.values[k];
    if (!std::isfinite(v)) continue;
    int r, gg, b;
    detail::diverging_color(vmax > 0.0 ? v / vmax : 0.0, r, gg, b);
    int x = g.i_of(k) * cell;
    int y = (g.n2() - 1 - g.j_of(k)) * cell;  // SVG y axis points down
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"#%02x%02x%02x\"/>\n",
                  x, y, cell, cell, r, gg, b);
    out << buf;
  }

  // legend: horizontal gradient bar with min / 0 / max labels
  out << "<defs><linearGradient id=\"lg\" x1=\"0\" y1=\"0\" x2=\"1\" y2=\"0\">\n";
  for (int s = 0; s <= 8; ++s) {
    int r, gg, b;
    detail::diverging_color(-1.0 + 0.25 * s, r, gg, b);
    std::snprintf(buf, sizeof buf,
                  "<stop offset=\"%d%%\" stop-color=\"#%02x%02x%02x\"/>\n", s * 100 / 8,
                  r, gg, b);
    out << buf;
  }
  out << "</linearGradient></defs>\n";
  std::snprintf(buf, sizeof buf,
                "<rect x=\"8\" y=\"%d\" width=\"%d\" height=\"12\" fill=\"url(#lg)\" "
                "stroke=\"#000000\"/>\n",
                plot_h + 8, width - 16);
  out << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"8\" y=\"%d\" font-size=\"12\" font-family=\"monospace\">%.6g</text>\n",
                plot_h + 36, -vmax);
  out << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%d\" y=\"%d\" font-size=\"12\" font-family=\"monospace\" "
                "text-anchor=\"middle\">0</text>\n",
                width / 2, plot_h + 36);
  out << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%d\" y=\"%d\" font-size=\"12\" font-family=\"monospace\" "
                "text-anchor=\"end\">%.6g</text>\n",
                width - 8, plot_h + 36, vmax);
  out << buf;
  out << "</svg>\n";
}

}  // namespace ma
