#include "ncdlab/svg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "ncdlab/errors.hpp"

namespace ncdlab::harness {

namespace {

struct Rgb {
  int r, g, b;
};

Rgb parse_hex(const char* hex) {
  auto byte = [&](int i) { return std::stoi(std::string(hex + 1 + 2 * i, 2), nullptr, 16); };
  return {byte(0), byte(1), byte(2)};
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw IoError("failed writing " + path.string());
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

}  // namespace

std::string colormap(double value) {
  double t = std::clamp(value, 0.0, 1.0);
  auto lo = parse_hex(kColorLow);
  auto hi = parse_hex(kColorHigh);
  auto mix = [&](int a, int b) { return static_cast<int>(std::lround(a + t * (b - a))); };
  return fmt::format("#{:02x}{:02x}{:02x}", mix(lo.r, hi.r), mix(lo.g, hi.g), mix(lo.b, hi.b));
}

std::string heatmap_svg(const HeatmapGrid& grid) {
  constexpr int cell = 56;
  constexpr int left = 90;
  constexpr int top = 60;
  constexpr int bottom = 60;
  const int n_rows = static_cast<int>(grid.row_values.size());
  const int n_cols = static_cast<int>(grid.col_values.size());
  const int width = left + n_cols * cell + 30;
  const int height = top + n_rows * cell + bottom;

  std::string s;
  s += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} "
      "{1}\" font-family=\"sans-serif\">\n",
      width, height);
  std::string title = fmt::format("{} / {} / {} / {}", grid.experiment_id, grid.metric,
                                  expdesign::to_string(grid.task),
                                  expdesign::to_string(grid.split_mode));
  s += fmt::format("<title>{}</title>\n", escape(title));
  s += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  s += fmt::format(
      "<text class=\"title\" x=\"{}\" y=\"28\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
      width / 2, escape(title));

  for (int r = 0; r < n_rows; ++r) {
    for (int c = 0; c < n_cols; ++c) {
      const auto& hc = grid.cells[r][c];
      const int x = left + c * cell;
      const int y = top + r * cell;
      if (!hc.feasible) {
        s += fmt::format(
            "<rect class=\"cell-infeasible\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" "
            "fill=\"#d9d9d9\" stroke=\"#ffffff\"/>\n",
            x, y, cell, cell);
        s += fmt::format(
            "<text class=\"na\" x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"11\" "
            "fill=\"#666666\">n/a</text>\n",
            x + cell / 2, y + cell / 2 + 4);
        continue;
      }
      s += fmt::format(
          "<rect class=\"cell\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" "
          "stroke=\"#ffffff\"/>\n",
          x, y, cell, cell, colormap(hc.mean));
      s += fmt::format(
          "<text class=\"value\" x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\" "
          "fill=\"{}\">{:.2f}</text>\n",
          x + cell / 2, y + cell / 2 + 4, hc.mean > 0.55 ? "#ffffff" : "#000000", hc.mean);
    }
  }

  for (int c = 0; c < n_cols; ++c)
    s += fmt::format(
        "<text class=\"tick\" x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\">{}</text>\n",
        left + c * cell + cell / 2, top + n_rows * cell + 18, grid.col_values[c]);
  for (int r = 0; r < n_rows; ++r)
    s += fmt::format(
        "<text class=\"tick\" x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"12\">{}</text>\n",
        left - 8, top + r * cell + cell / 2 + 4, grid.row_values[r]);
  s += fmt::format(
      "<text class=\"axis\" x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\"># known "
      "classes</text>\n",
      left + n_cols * cell / 2, top + n_rows * cell + 44);
  s += fmt::format(
      "<text class=\"axis\" x=\"{0}\" y=\"{1}\" text-anchor=\"middle\" font-size=\"13\" "
      "transform=\"rotate(-90 {0} {1})\"># unknown classes</text>\n",
      30, top + n_rows * cell / 2);
  s += "</svg>\n";
  return s;
}

void emit_heatmap_svg(const HeatmapGrid& grid, const std::filesystem::path& path) {
  write_file(path, heatmap_svg(grid));
}

std::string curve_svg(const CurvePlot& plot) {
  constexpr int width = 640;
  constexpr int height = 420;
  constexpr int left = 70;
  constexpr int right = 160;
  constexpr int top = 50;
  constexpr int bottom = 60;
  const int pw = width - left - right;
  const int ph = height - top - bottom;

  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -x_min;
  for (const auto& series : plot.series)
    for (const auto& [x, y] : series.points) {
      double v = plot.log_x ? std::log10(x) : x;
      x_min = std::min(x_min, v);
      x_max = std::max(x_max, v);
    }
  if (!std::isfinite(x_min)) {
    x_min = 0.0;
    x_max = 1.0;
  }
  if (x_max == x_min) x_max = x_min + 1.0;
  auto px = [&](double x) {
    double v = plot.log_x ? std::log10(x) : x;
    return left + (v - x_min) / (x_max - x_min) * pw;
  };
  auto py = [&](double y) { return top + (1.0 - std::clamp(y, 0.0, 1.0)) * ph; };

  std::string s;
  s += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} "
      "{1}\" font-family=\"sans-serif\">\n",
      width, height);
  s += fmt::format("<title>{}</title>\n", escape(plot.title));
  s += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  s += fmt::format(
      "<text class=\"title\" x=\"{}\" y=\"28\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
      left + pw / 2, escape(plot.title));
  s += fmt::format(
      "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333333\"/>\n",
      left, top, pw, ph);
  for (int i = 0; i <= 4; ++i) {
    double y = i / 4.0;
    s += fmt::format(
        "<text class=\"tick\" x=\"{}\" y=\"{:.1f}\" text-anchor=\"end\" font-size=\"11\">{:.2f}</text>\n",
        left - 6, py(y) + 4, y);
  }
  for (int i = 0; i <= 4; ++i) {
    double v = x_min + (x_max - x_min) * i / 4.0;
    double label = plot.log_x ? std::pow(10.0, v) : v;
    s += fmt::format(
        "<text class=\"tick\" x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\" font-size=\"11\">{:.4g}</text>\n",
        left + pw * i / 4.0, top + ph + 16, label);
  }
  s += fmt::format(
      "<text class=\"axis\" x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\">{}</text>\n",
      left + pw / 2, height - 18, escape(plot.x_label));
  s += fmt::format(
      "<text class=\"axis\" x=\"{0}\" y=\"{1}\" text-anchor=\"middle\" font-size=\"13\" "
      "transform=\"rotate(-90 {0} {1})\">{2}</text>\n",
      20, top + ph / 2, escape(plot.y_label));

  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& series = plot.series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    std::string pts;
    for (const auto& [x, y] : series.points) pts += fmt::format("{:.2f},{:.2f} ", px(x), py(y));
    if (!pts.empty()) pts.pop_back();
    s += fmt::format(
        "<polyline class=\"series\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n",
        color, pts);
    for (const auto& [x, y] : series.points)
      s += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\"/>\n", px(x), py(y),
                       color);
    const int ly = top + 14 + static_cast<int>(k) * 18;
    s += fmt::format(
        "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"/>\n",
        left + pw + 12, ly - 4, left + pw + 32, color);
    s += fmt::format("<text class=\"legend\" x=\"{}\" y=\"{}\" font-size=\"11\">{}</text>\n",
                     left + pw + 38, ly, escape(series.name));
  }
  s += "</svg>\n";
  return s;
}

void emit_curve_svg(const CurvePlot& plot, const std::filesystem::path& path) {
  write_file(path, curve_svg(plot));
}

}  // namespace ncdlab::harness
