#pragma once

// Minimal static line/marker plots written as SVG text.

#include <string>
#include <vector>

namespace rcsense {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool lines = true;
  bool markers = true;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  int width = 720;
  int height = 480;
};

/// Non-positive values are dropped on log axes; an empty plot still renders
/// axes and the title.
[[nodiscard]] std::string render_svg(const PlotSpec& spec,
                                     const std::vector<PlotSeries>& series);

}  // namespace rcsense
