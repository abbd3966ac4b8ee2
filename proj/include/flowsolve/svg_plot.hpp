#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace flowsolve {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotAxes {
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::string title;
};

/// Standalone SVG document: one polyline per series, axis ticks and a legend.
std::string render_svg_plot(const std::vector<PlotSeries>& series, const PlotAxes& axes);

void emit_svg_plot(const std::vector<PlotSeries>& series, const PlotAxes& axes,
                   const std::filesystem::path& path);

}  // namespace flowsolve
