#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace krbn::tools {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;  // points instead of a polyline
};

struct PlotSpec {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool log_x = false;
  bool log_y = false;
};

// Static SVG line chart with axes, ticks and a legend. Non-positive values are
// dropped on log axes.
void write_svg_plot(const std::filesystem::path& file, const PlotSpec& spec, const std::vector<PlotSeries>& series);

}  // namespace krbn::tools
