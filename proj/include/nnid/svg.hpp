// Minimal static SVG line plots for run artifacts.
#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace nnid {

struct Series {
  std::string name;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title{};
  std::string xlabel = "t [s]";
  std::string ylabel{};
  bool log_y = false;
  bool step = false;  // draw as a staircase (for categorical traces)
  std::vector<std::pair<double, std::string>> hlines{};  // labelled guides
  std::size_t max_points = 1500;  // per series, after min/max decimation
};

/// Writes a self-contained SVG document. Non-finite samples and, with
/// log_y, non-positive samples are skipped.
void write_line_plot(std::ostream& os, const std::vector<double>& x,
                     const std::vector<Series>& series, const PlotSpec& spec);

void save_line_plot(const std::string& path, const std::vector<double>& x,
                    const std::vector<Series>& series, const PlotSpec& spec);

}  // namespace nnid
