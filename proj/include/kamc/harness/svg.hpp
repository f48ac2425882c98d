#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "kamc/error.hpp"

namespace kamc::harness {

struct Series {
  std::string name;
  std::vector<double> values;  // plotted against their index
};

struct PlotGeometry {
  double width = 640.0;
  double height = 400.0;
  double margin = 50.0;
  double legend_width = 140.0;
};

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

inline std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline constexpr std::array<const char*, 6> kPalette{"#1f77b4", "#d62728", "#2ca02c",
                                                     "#9467bd", "#ff7f0e", "#17becf"};

}  // namespace detail

/// Minimal line chart: axes, one polyline per series, legend. Identical
/// input gives identical bytes. Non-finite values are skipped.
inline std::string render_plot(const std::vector<Series>& series, const std::string& title = {},
                               const PlotGeometry& geo = {}) {
  if (series.empty()) throw ConfigError("series", "nothing to plot");
  double lo = INFINITY, hi = -INFINITY;
  std::size_t longest = 0;
  for (const auto& s : series) {
    if (s.values.empty()) throw ConfigError("series", "series '" + s.name + "' is empty");
    longest = std::max(longest, s.values.size());
    for (double v : s.values)
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  }
  if (!std::isfinite(lo)) throw ConfigError("series", "no finite values");
  if (hi == lo) {
    const double pad = lo == 0.0 ? 1.0 : 0.5 * std::abs(lo);
    lo -= pad;
    hi += pad;
  }

  const double x0 = geo.margin, x1 = geo.width - geo.legend_width;
  const double y0 = geo.height - geo.margin, y1 = geo.margin;
  const double xspan = longest > 1 ? static_cast<double>(longest - 1) : 1.0;
  auto px = [&](std::size_t i) { return x0 + (x1 - x0) * static_cast<double>(i) / xspan; };
  auto py = [&](double v) { return y0 + (y1 - y0) * (v - lo) / (hi - lo); };

  using detail::fmt;
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(geo.width) + "\" height=\"" +
         fmt(geo.height) + "\" viewBox=\"0 0 " + fmt(geo.width) + " " + fmt(geo.height) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty())
    out += "<text x=\"" + fmt(geo.width / 2) + "\" y=\"20.000\" text-anchor=\"middle\" font-size=\"14\">" +
           detail::escape(title) + "</text>\n";
  out += "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\">\n";
  out += "<line x1=\"" + fmt(x0) + "\" y1=\"" + fmt(y0) + "\" x2=\"" + fmt(x1) + "\" y2=\"" + fmt(y0) + "\"/>\n";
  out += "<line x1=\"" + fmt(x0) + "\" y1=\"" + fmt(y0) + "\" x2=\"" + fmt(x0) + "\" y2=\"" + fmt(y1) + "\"/>\n";
  out += "</g>\n";
  out += "<text x=\"" + fmt(x0 - 5) + "\" y=\"" + fmt(y0) + "\" text-anchor=\"end\" font-size=\"10\">" +
         detail::escape(detail::label(lo)) + "</text>\n";
  out += "<text x=\"" + fmt(x0 - 5) + "\" y=\"" + fmt(y1) + "\" text-anchor=\"end\" font-size=\"10\">" +
         detail::escape(detail::label(hi)) + "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = detail::kPalette[s % detail::kPalette.size()];
    out += "<polyline class=\"series\" data-name=\"" + detail::escape(series[s].name) +
           "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < series[s].values.size(); ++i) {
      const double v = series[s].values[i];
      if (!std::isfinite(v)) continue;
      if (!first) out += ' ';
      out += fmt(px(i)) + "," + fmt(py(v));
      first = false;
    }
    out += "\"/>\n";
    const double ly = geo.margin + 18.0 * static_cast<double>(s);
    out += "<g class=\"legend\"><line x1=\"" + fmt(x1 + 10) + "\" y1=\"" + fmt(ly) + "\" x2=\"" +
           fmt(x1 + 30) + "\" y2=\"" + fmt(ly) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/><text x=\"" + fmt(x1 + 35) + "\" y=\"" + fmt(ly + 4) +
           "\" font-size=\"11\">" + detail::escape(series[s].name) + "</text></g>\n";
  }
  out += "</svg>\n";
  return out;
}

/// Write render_plot(series) to `path`.
inline void emit_plot(const std::vector<Series>& series, const std::filesystem::path& path,
                      const std::string& title = {}) {
  const std::string svg = render_plot(series, title);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << svg;
}

}  // namespace kamc::harness
