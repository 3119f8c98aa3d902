#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "pddid/csv.hpp"
#include "pddid/errors.hpp"
#include "pddid/report.hpp"

namespace pddid {

struct ChartCurve {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (gamma, rejection rate), x ascending
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
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

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace detail

/// Standalone SVG line chart of rejection-rate curves: one polyline per
/// curve, a legend in input order, axes labeled "true effect γ" and
/// "rejection rate", and gray reference lines at 0.05 (nominal size) and 1.
inline std::string power_chart_svg(const std::vector<ChartCurve>& curves) {
  if (curves.empty()) throw Error(ErrorCode::ConfigInvalid, "chart needs at least one curve");
  double x_min = 0.0, x_max = 0.0;
  bool first = true;
  for (const auto& curve : curves) {
    if (curve.points.empty()) {
      throw Error(ErrorCode::ConfigInvalid, "curve '" + curve.label + "' has no points");
    }
    for (std::size_t i = 0; i + 1 < curve.points.size(); ++i) {
      if (!(curve.points[i].first < curve.points[i + 1].first)) {
        throw Error(ErrorCode::ConfigInvalid, "curve '" + curve.label + "' is not x-ascending");
      }
    }
    const double lo = curve.points.front().first;
    const double hi = curve.points.back().first;
    x_min = first ? lo : std::min(x_min, lo);
    x_max = first ? hi : std::max(x_max, hi);
    first = false;
  }
  if (x_max == x_min) {
    x_min -= 0.5;
    x_max += 0.5;
  }
  const double y_min = 0.0, y_max = 1.05;

  constexpr double width = 640, height = 480;
  constexpr double ml = 70, mr = 160, mt = 30, mb = 55;
  const double plot_w = width - ml - mr;
  const double plot_h = height - mt - mb;
  auto sx = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * plot_w; };
  auto sy = [&](double y) { return mt + plot_h - (y - y_min) / (y_max - y_min) * plot_h; };

  static const char* kPalette[] = {"#000000", "#1a9641", "#d7191c", "#2b83ba",
                                   "#ff7f00", "#984ea3", "#a65628"};
  constexpr int kPaletteSize = 7;

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
         "viewBox=\"0 0 640 480\" font-family=\"sans-serif\" font-size=\"13\">\n";
  svg += "<rect x=\"" + detail::svg_num(ml) + "\" y=\"" + detail::svg_num(mt) + "\" width=\"" +
         detail::svg_num(plot_w) + "\" height=\"" + detail::svg_num(plot_h) +
         "\" fill=\"none\" stroke=\"#444444\"/>\n";

  for (double ref : {0.05, 1.0}) {
    svg += "<line class=\"ref\" x1=\"" + detail::svg_num(ml) + "\" y1=\"" + detail::svg_num(sy(ref)) +
           "\" x2=\"" + detail::svg_num(ml + plot_w) + "\" y2=\"" + detail::svg_num(sy(ref)) +
           "\" stroke=\"#999999\" stroke-dasharray=\"5,4\"/>\n";
    svg += "<text x=\"" + detail::svg_num(ml - 8) + "\" y=\"" + detail::svg_num(sy(ref) + 4) +
           "\" text-anchor=\"end\" fill=\"#666666\">" + (ref == 1.0 ? "1" : "0.05") + "</text>\n";
  }
  for (double tick : {x_min, 0.5 * (x_min + x_max), x_max}) {
    svg += "<text x=\"" + detail::svg_num(sx(tick)) + "\" y=\"" + detail::svg_num(mt + plot_h + 20) +
           "\" text-anchor=\"middle\" fill=\"#333333\">" + detail::svg_num(tick) + "</text>\n";
  }
  for (double tick : {0.0, 0.5}) {
    svg += "<text x=\"" + detail::svg_num(ml - 8) + "\" y=\"" + detail::svg_num(sy(tick) + 4) +
           "\" text-anchor=\"end\" fill=\"#333333\">" + detail::svg_num(tick) + "</text>\n";
  }

  svg += "<text x=\"" + detail::svg_num(ml + plot_w / 2) + "\" y=\"" + detail::svg_num(height - 12) +
         "\" text-anchor=\"middle\">true effect \xCE\xB3</text>\n";
  svg += "<text x=\"18\" y=\"" + detail::svg_num(mt + plot_h / 2) +
         "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " + detail::svg_num(mt + plot_h / 2) +
         ")\">rejection rate</text>\n";

  for (std::size_t c = 0; c < curves.size(); ++c) {
    const char* color = kPalette[c % kPaletteSize];
    std::string pts;
    for (const auto& [x, y] : curves[c].points) {
      if (!pts.empty()) pts += ' ';
      pts += detail::svg_num(sx(x)) + "," + detail::svg_num(sy(std::clamp(y, y_min, y_max)));
    }
    svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"1.8\"/>\n";
    const double ly = mt + 18 + 20 * static_cast<double>(c);
    svg += "<text class=\"legend\" x=\"" + detail::svg_num(ml + plot_w + 12) + "\" y=\"" +
           detail::svg_num(ly) + "\" fill=\"" + color + "\">" + detail::xml_escape(curves[c].label) +
           "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

inline void render_power_chart(const std::vector<ChartCurve>& curves, const std::string& path) {
  detail::write_text_file(path, power_chart_svg(curves));
}

}  // namespace pddid
