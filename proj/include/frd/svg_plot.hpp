#pragma once

#include <string>
#include <vector>

namespace frd {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Static SVG with one stacked panel per series. Values that are not finite
/// are skipped; `log_y` plots log10 of the positive values.
std::string svg_line_panels(const std::vector<PlotSeries>& series, const std::string& title, bool log_y = false);

}  // namespace frd
