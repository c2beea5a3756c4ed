#pragma once

#include <string>
#include <vector>

namespace wonham {

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;  // non-positive values break the line
  double rate = 0.0;      // printed at the end of the line
};

// Self-contained SVG: log10 y-axis, one polyline per series, each annotated
// with its rate. Coordinates are printed with fixed precision so identical
// input gives identical bytes.
std::string render_log_plot(const std::vector<SvgSeries>& series, const std::string& title,
                            const std::string& x_label = "t", const std::string& y_label = "E chi^2");

}  // namespace wonham
