#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ncdlab/harness.hpp"

namespace ncdlab::harness {

// Colormap endpoints; values are clamped to [0, 1].
inline constexpr const char* kColorLow = "#f7fbff";
inline constexpr const char* kColorHigh = "#08306b";

std::string colormap(double value);

// Standalone SVG heat map: one <rect class="cell"> and one <text class="value">
// per feasible cell, hatched grey for infeasible ones.
std::string heatmap_svg(const HeatmapGrid& grid);
void emit_heatmap_svg(const HeatmapGrid& grid, const std::filesystem::path& path);

struct CurveSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

struct CurvePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  std::vector<CurveSeries> series;
};

std::string curve_svg(const CurvePlot& plot);
void emit_curve_svg(const CurvePlot& plot, const std::filesystem::path& path);

}  // namespace ncdlab::harness
