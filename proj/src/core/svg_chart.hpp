#pragma once

#include <string>
#include <vector>

namespace mars {

struct ChartSeries {
  std::string label;
  std::vector<double> values;  // one per x label; NaN-free
};

struct ChartBar {
  std::string label;
  double value;
};

// Self-contained SVG documents, no external assets. The x axis is
// categorical: labels are spaced evenly, which suits the power-of-two
// window sweeps these charts are drawn for.
std::string line_chart_svg(const std::string& title, const std::string& y_label,
                           const std::vector<std::string>& x_labels,
                           const std::vector<ChartSeries>& series);

std::string bar_chart_svg(const std::string& title, const std::string& y_label,
                          const std::vector<ChartBar>& bars);

}  // namespace mars
