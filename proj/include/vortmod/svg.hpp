#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace vortmod {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
};

// Static 800x600 line chart on linear axes.
std::string render_line_chart(const std::vector<Series>& series, const ChartSpec& spec);
void write_line_chart(const std::filesystem::path& path, const std::vector<Series>& series,
                      const ChartSpec& spec);

// Roughly `target` evenly spaced round ticks covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi, int target = 6);

}  // namespace vortmod
