#pragma once

#include <span>
#include <string>
#include <vector>

namespace ttlm {

// One group of bars, e.g. one evaluation report: values align with the
// metric-name list passed to chart_svg, all in [0, 1].
struct ChartSeries {
  std::string label;
  std::vector<double> values;
};

// Grouped bar chart as standalone SVG. Bar height in px is exactly
// value * 200 (written with two decimals), so relative bar heights mirror
// relative metric values.
std::string chart_svg(std::span<const std::string> metric_names,
                      std::span<const ChartSeries> series);

}  // namespace ttlm
