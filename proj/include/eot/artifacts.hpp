#pragma once

#include <string>
#include <vector>

namespace eot {

// Writes content to path via a temporary file in the same directory followed
// by an atomic rename, so readers never observe a partial artifact.
void atomic_write_file(const std::string& path, const std::string& content);

struct PlotSeries {
  std::string label;
  std::vector<double> ns;      // sample sizes (x, log scale)
  std::vector<double> deltas;  // mean absolute deviations (y, log scale)
  double fitted_slope = 0.0;
  bool has_fit = false;
};

// Self-contained log-log SVG of deviation-vs-size curves with a reference
// slope -1/2 guide line. Throws bad_config when nothing is plottable.
std::string svg_rate_plot(const std::vector<PlotSeries>& series, const std::string& title);

}  // namespace eot
