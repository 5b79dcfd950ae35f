#include "ttlm/chart.hpp"

#include <cstdio>
#include <sstream>

#include "ttlm/errors.hpp"

namespace ttlm {

namespace {

constexpr double kPlotHeight = 200.0;
constexpr double kBarWidth = 36.0;
constexpr double kBarGap = 8.0;
constexpr double kGroupGap = 40.0;
constexpr double kLeft = 60.0;
constexpr double kTop = 40.0;

const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc949"};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

std::string f2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

std::string chart_svg(std::span<const std::string> metric_names,
                      std::span<const ChartSeries> series) {
  if (metric_names.empty()) throw UsageError("chart needs at least one metric");
  if (series.empty()) throw UsageError("chart needs at least one series");
  for (const ChartSeries& s : series) {
    if (s.values.size() != metric_names.size()) {
      throw DimensionError("series '" + s.label + "' has " + std::to_string(s.values.size()) +
                           " values for " + std::to_string(metric_names.size()) + " metrics");
    }
    for (double v : s.values) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw DataError("chart values must lie in [0, 1], got " + std::to_string(v));
      }
    }
  }

  const std::size_t m = metric_names.size();
  const double group_width = static_cast<double>(m) * kBarWidth +
                             static_cast<double>(m - 1) * kBarGap;
  const double width = kLeft + static_cast<double>(series.size()) * (group_width + kGroupGap) + 20.0;
  const double baseline = kTop + kPlotHeight;
  const double legend_height = 24.0 * static_cast<double>(m);
  const double height = baseline + 40.0 + legend_height;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f2(width) << "\" height=\""
     << f2(height) << "\" viewBox=\"0 0 " << f2(width) << " " << f2(height) << "\">\n";
  os << "  <rect x=\"0\" y=\"0\" width=\"" << f2(width) << "\" height=\"" << f2(height)
     << "\" fill=\"#ffffff\"/>\n";

  // Axis with quarter gridlines.
  for (int tick = 0; tick <= 4; ++tick) {
    const double value = static_cast<double>(tick) / 4.0;
    const double y = baseline - value * kPlotHeight;
    os << "  <line x1=\"" << f2(kLeft - 6.0) << "\" y1=\"" << f2(y) << "\" x2=\""
       << f2(width - 14.0) << "\" y2=\"" << f2(y) << "\" stroke=\""
       << (tick == 0 ? "#333333" : "#dddddd") << "\" stroke-width=\"1\"/>\n";
    os << "  <text x=\"" << f2(kLeft - 10.0) << "\" y=\"" << f2(y + 4.0)
       << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << f2(value)
       << "</text>\n";
  }

  for (std::size_t si = 0; si < series.size(); ++si) {
    const ChartSeries& s = series[si];
    const double gx = kLeft + kGroupGap / 2.0 + static_cast<double>(si) * (group_width + kGroupGap);
    for (std::size_t mi = 0; mi < m; ++mi) {
      const double v = s.values[mi];
      const double bar_h = v * kPlotHeight;
      const double x = gx + static_cast<double>(mi) * (kBarWidth + kBarGap);
      const double y = baseline - bar_h;
      os << "  <rect class=\"bar\" x=\"" << f2(x) << "\" y=\"" << f2(y) << "\" width=\""
         << f2(kBarWidth) << "\" height=\"" << f2(bar_h) << "\" fill=\""
         << kPalette[mi % kPaletteSize] << "\"/>\n";
      os << "  <text x=\"" << f2(x + kBarWidth / 2.0) << "\" y=\"" << f2(y - 4.0)
         << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" << f2(v)
         << "</text>\n";
    }
    os << "  <text x=\"" << f2(gx + group_width / 2.0) << "\" y=\"" << f2(baseline + 18.0)
       << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">"
       << xml_escape(s.label) << "</text>\n";
  }

  // Legend: one swatch per metric.
  for (std::size_t mi = 0; mi < m; ++mi) {
    const double y = baseline + 36.0 + 24.0 * static_cast<double>(mi);
    os << "  <rect x=\"" << f2(kLeft) << "\" y=\"" << f2(y) << "\" width=\"14\" height=\"14\" fill=\""
       << kPalette[mi % kPaletteSize] << "\"/>\n";
    os << "  <text x=\"" << f2(kLeft + 20.0) << "\" y=\"" << f2(y + 11.0)
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(metric_names[mi])
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace ttlm
