#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace feasible {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Minimal line chart with axes, min/max tick labels and a legend.
/// Non-finite points are skipped.
std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label, const std::vector<Series>& series);
void write_line_chart(const std::filesystem::path& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series);

}  // namespace feasible
