#pragma once
// Minimal self-contained SVG line charts with shaded error bands. Output is
// plain deterministic text.

#include <string>
#include <vector>

namespace nnklab {

struct ChartSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> band;  // half-width of the shaded band, may be empty
  bool dashed = false;
};

void write_line_chart_svg(const std::string& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<ChartSeries>& series);

}  // namespace nnklab
