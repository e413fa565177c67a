#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ncdlab::shapegen {

inline constexpr int kCanvasSize = 64;
inline constexpr int kPixelCount = kCanvasSize * kCanvasSize;
inline constexpr double kCanvasCenter = kCanvasSize / 2.0;

// Side of the base square; the circle is the inscribed one (radius side/2).
inline constexpr double kSquareSide = 20.0;
inline constexpr int kBoundaryPoints = 64;

// 64x64 binary raster, row-major, row 0 at the top.
class BinaryImage {
 public:
  static constexpr int width = kCanvasSize;
  static constexpr int height = kCanvasSize;

  BinaryImage() { pixels_.fill(0); }

  std::uint8_t at(int row, int col) const { return pixels_[index(row, col)]; }
  void set(int row, int col, std::uint8_t v) { pixels_[index(row, col)] = v ? 1 : 0; }

  const std::array<std::uint8_t, kPixelCount>& pixels() const { return pixels_; }

  int count() const;
  // Row-major indices of the set pixels, ascending.
  std::vector<int> active_indices() const;

  // Content moved by (dx, dy) pixels; pixels pushed off the canvas are lost.
  BinaryImage shifted(int dx, int dy) const;
  BinaryImage mirrored_horizontally() const;

  bool operator==(const BinaryImage&) const = default;

 private:
  static constexpr int index(int row, int col) { return row * kCanvasSize + col; }

  std::array<std::uint8_t, kPixelCount> pixels_;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

// Closed polygon; the last point connects back to the first.
struct BoundaryPointSet {
  std::vector<Point> points;

  std::size_t count() const { return points.size(); }
  bool operator==(const BoundaryPointSet&) const = default;
};

// Square of side `side` centred on the canvas, sampled at equal angular
// steps with r(theta) = side / (2 max(|cos|, |sin|)).
BoundaryPointSet make_square_boundary(int n_points, double side = kSquareSide);

BoundaryPointSet make_circle_boundary(int n_points, double radius = kSquareSide / 2.0);

// Index-wise blend (1 - alpha) * square + alpha * circle.
BoundaryPointSet interpolate_shape(double alpha, int n_points = kBoundaryPoints);

BoundaryPointSet interpolate_boundaries(const BoundaryPointSet& from,
                                        const BoundaryPointSet& to, double alpha);

// Even-odd scanline fill on pixel centres of the polygon translated by (dx, dy).
// Throws OutOfBoundsError if the translated polygon leaves the canvas.
BinaryImage rasterize(const BoundaryPointSet& boundary, int dx, int dy);

// Signed shoelace area, positive for counter-clockwise in (x, y) coordinates.
double polygon_area(const BoundaryPointSet& boundary);

enum class SpriteShape : int { square = 0, ellipse = 1, heart = 2 };

std::string_view to_string(SpriteShape s);

struct DSpritesFactors {
  SpriteShape shape = SpriteShape::square;
  int scale = 0;        // 0..5
  int orientation = 0;  // 0..39
  int x_pos = 0;        // 0..31
  int y_pos = 0;        // 0..31
};

struct SquircleFactors {
  int shape_idx = 0;  // 0..19, alpha = shape_idx / 19
  int x_shift = 0;    // 0..9
  int y_shift = 0;    // 0..9
};

inline constexpr int kSpriteShapes = 3;
inline constexpr int kSpriteScales = 6;
inline constexpr int kSpriteOrientations = 40;
inline constexpr int kSpritePositions = 32;
inline constexpr int kSquircleShapes = 20;
inline constexpr int kSquircleShifts = 10;

// Centre position index that maps to the canvas centre.
inline constexpr int kSpriteCenterIndex = 16;

double sprite_scale_multiplier(int scale);

// Base outline of a dSprites shape at scale multiplier 1, centred on the canvas.
BoundaryPointSet sprite_boundary(SpriteShape shape, int n_points = kBoundaryPoints);

BinaryImage render_dsprites(const DSpritesFactors& f);
BinaryImage render_squircle(const SquircleFactors& f);

void validate(const DSpritesFactors& f);
void validate(const SquircleFactors& f);

// Plain PGM (P2), maxval 255, pixels written as 0 or 255.
std::string to_pgm(const BinaryImage& image);
void write_pgm(const BinaryImage& image, const std::filesystem::path& path);

}  // namespace ncdlab::shapegen
