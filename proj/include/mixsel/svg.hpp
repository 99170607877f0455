#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "mixsel/errors.hpp"

// Hand-rolled SVG line chart: axes, one polyline per labeled series, a small
// legend. The numeric CSVs are the authoritative output; this is a
// convenience rendering.

namespace mixsel {

struct SvgSeries {
  std::string label;
  std::vector<double> values;  // y per round, x is the index
};

inline void write_svg_chart(const std::string& path, const std::string& title,
                            const std::vector<SvgSeries>& series) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                  "#9467bd", "#ff7f0e", "#8c564b"};
  const int width = 720, height = 440;
  const int ml = 60, mr = 20, mt = 40, mb = 40;

  double ymin = std::numeric_limits<double>::infinity();
  double ymax = -std::numeric_limits<double>::infinity();
  std::size_t xmax = 1;
  for (const SvgSeries& s : series) {
    xmax = std::max(xmax, s.values.size());
    for (double v : s.values)
      if (std::isfinite(v)) {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
      }
  }
  if (!std::isfinite(ymin)) {
    ymin = 0.0;
    ymax = 1.0;
  }
  if (ymax - ymin < 1e-12) ymax = ymin + 1.0;

  auto px = [&](double x) {
    return ml + x / static_cast<double>(xmax - 1 ? xmax - 1 : 1) *
                    (width - ml - mr);
  };
  auto py = [&](double y) {
    return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb);
  };
  auto fmt = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::string(buf);
  };

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"14\">" << title
      << "</text>\n";
  // Axes.
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
      << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\""
      << width - mr << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << ml - 8 << "\" y=\"" << py(ymax) + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
         "font-size=\"10\">"
      << fmt(ymax) << "</text>\n";
  out << "<text x=\"" << ml - 8 << "\" y=\"" << py(ymin) + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
         "font-size=\"10\">"
      << fmt(ymin) << "</text>\n";
  out << "<text x=\"" << width - mr << "\" y=\"" << height - mb + 16
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
         "font-size=\"10\">round "
      << xmax << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % 6];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series[s].values.size(); ++i) {
      const double v = series[s].values[i];
      if (!std::isfinite(v)) continue;
      out << fmt(px(static_cast<double>(i))) << ',' << fmt(py(v)) << ' ';
    }
    out << "\"/>\n";
    out << "<text x=\"" << ml + 10 << "\" y=\"" << mt + 14 * (s + 1)
        << "\" fill=\"" << color
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << series[s].label
        << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace mixsel
