#pragma once

#include <string>
#include <vector>

namespace notewatch::svgplot {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;  // same length as x
};

struct ChartOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 720;
  int height = 480;
  // Fixed axis range when lo < hi; otherwise the range fits the data.
  double x_lo = 0.0, x_hi = 0.0;
  double y_lo = 0.0, y_hi = 0.0;
};

// Polyline chart with axes, tick grid and a legend; one polyline per
// series. Non-finite coordinates are fatal. Byte-deterministic for
// identical inputs.
std::string line_chart(const std::vector<Series>& series, const ChartOptions& opt);

struct BarSeries {
  std::string label;
  std::vector<double> values;  // one value per bin
};

// Grouped bar chart over equal-width bins starting at bin_lo; series are
// drawn side by side within each bin. All series must have equally many
// bins. Negative or non-finite values are fatal.
std::string bar_chart(double bin_lo, double bin_width, const std::vector<BarSeries>& series,
                      const ChartOptions& opt);

}  // namespace notewatch::svgplot
