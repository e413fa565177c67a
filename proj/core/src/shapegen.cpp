#include "ncdlab/shapegen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "ncdlab/errors.hpp"

namespace ncdlab::shapegen {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Bounds {
  double min_x = std::numeric_limits<double>::infinity();
  double max_x = -std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  double max_y = -std::numeric_limits<double>::infinity();
};

Bounds bounds_of(const BoundaryPointSet& b) {
  Bounds r;
  for (const auto& p : b.points) {
    r.min_x = std::min(r.min_x, p.x);
    r.max_x = std::max(r.max_x, p.x);
    r.min_y = std::min(r.min_y, p.y);
    r.max_y = std::max(r.max_y, p.y);
  }
  return r;
}

// Classic heart curve x = 16 sin^3 t, y = 13 cos t - 5 cos 2t - 2 cos 3t - cos 4t,
// flipped so the tip points down in image rows.
BoundaryPointSet heart_boundary(int n_points) {
  BoundaryPointSet raw;
  raw.points.reserve(n_points);
  for (int i = 0; i < n_points; ++i) {
    double t = kTwoPi * i / n_points;
    double s = std::sin(t);
    double x = 16.0 * s * s * s;
    double y = 13.0 * std::cos(t) - 5.0 * std::cos(2 * t) - 2.0 * std::cos(3 * t) -
               std::cos(4 * t);
    raw.points.push_back({x, -y});
  }
  auto b = bounds_of(raw);
  double extent = std::max(b.max_x - b.min_x, b.max_y - b.min_y);
  double k = kSquareSide / extent;
  double mid_x = 0.5 * (b.min_x + b.max_x);
  double mid_y = 0.5 * (b.min_y + b.max_y);
  for (auto& p : raw.points) {
    p.x = kCanvasCenter + k * (p.x - mid_x);
    p.y = kCanvasCenter + k * (p.y - mid_y);
  }
  return raw;
}

BoundaryPointSet ellipse_boundary(int n_points) {
  // 2:1 axis ratio, major axis spanning the square's side.
  const double a = kSquareSide / 2.0;
  const double b = a / 2.0;
  BoundaryPointSet out;
  out.points.reserve(n_points);
  for (int i = 0; i < n_points; ++i) {
    double t = kTwoPi * i / n_points;
    out.points.push_back({kCanvasCenter + a * std::cos(t), kCanvasCenter + b * std::sin(t)});
  }
  return out;
}

BoundaryPointSet scale_and_rotate(const BoundaryPointSet& base, double m, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  BoundaryPointSet out;
  out.points.reserve(base.points.size());
  for (const auto& p : base.points) {
    double x = p.x - kCanvasCenter;
    double y = p.y - kCanvasCenter;
    out.points.push_back({kCanvasCenter + m * (c * x - s * y), kCanvasCenter + m * (s * x + c * y)});
  }
  return out;
}

void require_range(int v, int lo, int hi, const char* name) {
  if (v < lo || v > hi) {
    std::ostringstream msg;
    msg << name << " = " << v << " outside [" << lo << ", " << hi << "]";
    throw ParameterError(msg.str());
  }
}

}  // namespace

int BinaryImage::count() const {
  int n = 0;
  for (auto p : pixels_) n += p;
  return n;
}

std::vector<int> BinaryImage::active_indices() const {
  std::vector<int> out;
  for (int i = 0; i < kPixelCount; ++i)
    if (pixels_[i]) out.push_back(i);
  return out;
}

BinaryImage BinaryImage::shifted(int dx, int dy) const {
  BinaryImage out;
  for (int r = 0; r < height; ++r) {
    int rr = r + dy;
    if (rr < 0 || rr >= height) continue;
    for (int c = 0; c < width; ++c) {
      int cc = c + dx;
      if (cc < 0 || cc >= width) continue;
      out.pixels_[index(rr, cc)] = pixels_[index(r, c)];
    }
  }
  return out;
}

BinaryImage BinaryImage::mirrored_horizontally() const {
  BinaryImage out;
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) out.pixels_[index(r, width - 1 - c)] = pixels_[index(r, c)];
  return out;
}

BoundaryPointSet make_square_boundary(int n_points, double side) {
  if (n_points < 8 || n_points % 4 != 0)
    throw ParameterError("square boundary needs n_points >= 8 and divisible by 4, got " +
                         std::to_string(n_points));
  if (!(side > 0.0)) throw ParameterError("square side must be positive");
  BoundaryPointSet out;
  out.points.reserve(n_points);
  for (int i = 0; i < n_points; ++i) {
    double t = kTwoPi * i / n_points;
    double c = std::cos(t);
    double s = std::sin(t);
    double r = side / (2.0 * std::max(std::abs(c), std::abs(s)));
    out.points.push_back({kCanvasCenter + r * c, kCanvasCenter + r * s});
  }
  return out;
}

BoundaryPointSet make_circle_boundary(int n_points, double radius) {
  if (n_points < 8)
    throw ParameterError("circle boundary needs n_points >= 8, got " + std::to_string(n_points));
  if (!(radius > 0.0)) throw ParameterError("circle radius must be positive");
  BoundaryPointSet out;
  out.points.reserve(n_points);
  for (int i = 0; i < n_points; ++i) {
    double t = kTwoPi * i / n_points;
    out.points.push_back({kCanvasCenter + radius * std::cos(t), kCanvasCenter + radius * std::sin(t)});
  }
  return out;
}

BoundaryPointSet interpolate_boundaries(const BoundaryPointSet& from, const BoundaryPointSet& to,
                                        double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw ParameterError("alpha must lie in [0, 1], got " + std::to_string(alpha));
  if (from.count() != to.count())
    throw ParameterError("interpolation endpoints need equal point counts");
  BoundaryPointSet out;
  out.points.reserve(from.count());
  const double beta = 1.0 - alpha;
  for (std::size_t i = 0; i < from.count(); ++i) {
    out.points.push_back({beta * from.points[i].x + alpha * to.points[i].x,
                          beta * from.points[i].y + alpha * to.points[i].y});
  }
  return out;
}

BoundaryPointSet interpolate_shape(double alpha, int n_points) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw ParameterError("alpha must lie in [0, 1], got " + std::to_string(alpha));
  return interpolate_boundaries(make_square_boundary(n_points), make_circle_boundary(n_points),
                                alpha);
}

BinaryImage rasterize(const BoundaryPointSet& boundary, int dx, int dy) {
  if (boundary.count() < 3) throw ParameterError("polygon needs at least 3 points");
  auto b = bounds_of(boundary);
  if (!(b.min_x + dx >= 0.0 && b.max_x + dx <= kCanvasSize && b.min_y + dy >= 0.0 &&
        b.max_y + dy <= kCanvasSize)) {
    std::ostringstream msg;
    msg << "polygon [" << b.min_x + dx << ", " << b.max_x + dx << "] x [" << b.min_y + dy
        << ", " << b.max_y + dy << "] leaves the " << kCanvasSize << "x" << kCanvasSize
        << " canvas";
    throw OutOfBoundsError(msg.str());
  }

  // Pixel centres are sampled in the untranslated frame so integer shifts are exact.
  BinaryImage img;
  const auto& pts = boundary.points;
  const std::size_t n = pts.size();
  std::vector<double> xs;
  xs.reserve(n);
  for (int row = 0; row < kCanvasSize; ++row) {
    const double y = row + 0.5 - dy;
    if (y < b.min_y || y > b.max_y) continue;
    xs.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const Point& p = pts[i];
      const Point& q = pts[(i + 1) % n];
      if ((p.y <= y) != (q.y <= y)) xs.push_back(p.x + (y - p.y) * (q.x - p.x) / (q.y - p.y));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      // Centre x = col + 0.5 - dx inside (xs[k], xs[k+1]].
      int first = static_cast<int>(std::floor(xs[k] - 0.5)) + 1 + dx;
      int last = static_cast<int>(std::floor(xs[k + 1] - 0.5)) + dx;
      first = std::max(first, 0);
      last = std::min(last, kCanvasSize - 1);
      for (int col = first; col <= last; ++col) img.set(row, col, 1);
    }
  }
  return img;
}

double polygon_area(const BoundaryPointSet& boundary) {
  const auto& pts = boundary.points;
  double twice = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& p = pts[i];
    const auto& q = pts[(i + 1) % pts.size()];
    twice += p.x * q.y - q.x * p.y;
  }
  return 0.5 * twice;
}

std::string_view to_string(SpriteShape s) {
  switch (s) {
    case SpriteShape::square:
      return "square";
    case SpriteShape::ellipse:
      return "ellipse";
    case SpriteShape::heart:
      return "heart";
  }
  return "unknown";
}

double sprite_scale_multiplier(int scale) {
  require_range(scale, 0, kSpriteScales - 1, "scale");
  return 0.5 + 0.1 * scale;
}

BoundaryPointSet sprite_boundary(SpriteShape shape, int n_points) {
  switch (shape) {
    case SpriteShape::square:
      return make_square_boundary(n_points);
    case SpriteShape::ellipse:
      return ellipse_boundary(n_points);
    case SpriteShape::heart:
      return heart_boundary(n_points);
  }
  throw ParameterError("unknown sprite shape");
}

void validate(const DSpritesFactors& f) {
  require_range(static_cast<int>(f.shape), 0, kSpriteShapes - 1, "shape");
  require_range(f.scale, 0, kSpriteScales - 1, "scale");
  require_range(f.orientation, 0, kSpriteOrientations - 1, "orientation");
  require_range(f.x_pos, 0, kSpritePositions - 1, "x_pos");
  require_range(f.y_pos, 0, kSpritePositions - 1, "y_pos");
}

void validate(const SquircleFactors& f) {
  require_range(f.shape_idx, 0, kSquircleShapes - 1, "shape_idx");
  require_range(f.x_shift, 0, kSquircleShifts - 1, "x_shift");
  require_range(f.y_shift, 0, kSquircleShifts - 1, "y_shift");
}

BinaryImage render_dsprites(const DSpritesFactors& f) {
  validate(f);
  auto base = sprite_boundary(f.shape);
  const double m = sprite_scale_multiplier(f.scale);
  if (f.scale != kSpriteScales - 1 || f.orientation != 0) {
    base = scale_and_rotate(base, m, kTwoPi * f.orientation / kSpriteOrientations);
  }
  return rasterize(base, f.x_pos - kSpriteCenterIndex, f.y_pos - kSpriteCenterIndex);
}

BinaryImage render_squircle(const SquircleFactors& f) {
  validate(f);
  const double alpha = static_cast<double>(f.shape_idx) / (kSquircleShapes - 1);
  auto boundary = interpolate_shape(alpha, kBoundaryPoints);
  // Shifts step by 2 px over a grid centred on the canvas: offsets -9..+9.
  const int centre = kSquircleShifts - 1;
  return rasterize(boundary, 2 * f.x_shift - centre, 2 * f.y_shift - centre);
}

std::string to_pgm(const BinaryImage& image) {
  std::ostringstream out;
  out << "P2\n" << image.width << ' ' << image.height << "\n255\n";
  for (int r = 0; r < image.height; ++r) {
    for (int c = 0; c < image.width; ++c) {
      if (c) out << ' ';
      out << (image.at(r, c) ? 255 : 0);
    }
    out << '\n';
  }
  return out.str();
}

void write_pgm(const BinaryImage& image, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << to_pgm(image);
  if (!f) throw IoError("failed writing " + path.string());
}

}  // namespace ncdlab::shapegen
