#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "ncdlab/errors.hpp"
#include "ncdlab/shapegen.hpp"

using namespace ncdlab;
using namespace ncdlab::shapegen;

namespace {

BinaryImage centered_square_oracle() {
  BinaryImage img;
  for (int r = 0; r < kCanvasSize; ++r)
    for (int c = 0; c < kCanvasSize; ++c) {
      const double x = c + 0.5 - kCanvasCenter;
      const double y = r + 0.5 - kCanvasCenter;
      if (std::max(std::abs(x), std::abs(y)) < kSquareSide / 2) img.set(r, c, 1);
    }
  return img;
}

}  // namespace

TEST(Boundary, SquarePointsLieOnSquare) {
  const auto sq = make_square_boundary(kBoundaryPoints);
  ASSERT_EQ(sq.count(), 64u);
  for (const auto& p : sq.points)
    EXPECT_NEAR(std::max(std::abs(p.x - kCanvasCenter), std::abs(p.y - kCanvasCenter)), 10.0, 1e-9);
  EXPECT_NEAR(sq.points[0].x, kCanvasCenter + 10.0, 1e-12);
  EXPECT_NEAR(sq.points[0].y, kCanvasCenter, 1e-12);
  const auto& corner = sq.points[kBoundaryPoints / 8];
  EXPECT_NEAR(std::hypot(corner.x - kCanvasCenter, corner.y - kCanvasCenter), 10.0 * std::sqrt(2.0),
              1e-9);
}

TEST(Boundary, CirclePointsLieOnCircle) {
  for (const auto& p : make_circle_boundary(kBoundaryPoints).points)
    EXPECT_NEAR(std::hypot(p.x - kCanvasCenter, p.y - kCanvasCenter), 10.0, 1e-12);
}

TEST(Boundary, QuarterTurnMapsPointSetToItself) {
  for (double alpha : {0.0, 0.3, 1.0}) {
    const auto b = interpolate_shape(alpha);
    const int q = kBoundaryPoints / 4;
    for (int i = 0; i < kBoundaryPoints; ++i) {
      const auto& p = b.points[i];
      const auto& r = b.points[(i + q) % kBoundaryPoints];
      EXPECT_NEAR(kCanvasCenter - (p.y - kCanvasCenter), r.x, 1e-9);
      EXPECT_NEAR(kCanvasCenter + (p.x - kCanvasCenter), r.y, 1e-9);
    }
  }
}

TEST(Boundary, EndpointsMatchSourceShapes) {
  EXPECT_EQ(interpolate_shape(0.0), make_square_boundary(kBoundaryPoints));
  EXPECT_EQ(interpolate_shape(1.0), make_circle_boundary(kBoundaryPoints));
}

TEST(Boundary, RejectsBadArguments) {
  EXPECT_THROW(interpolate_shape(-0.01), ParameterError);
  EXPECT_THROW(interpolate_shape(1.01), ParameterError);
  EXPECT_THROW(make_square_boundary(10), ParameterError);
  EXPECT_THROW(make_square_boundary(4), ParameterError);
}

TEST(Boundary, AreaShrinksFromSquareToCircle) {
  const double sq = polygon_area(interpolate_shape(0.0));
  const double ci = polygon_area(interpolate_shape(1.0));
  EXPECT_NEAR(sq, 400.0, 1e-9);
  // inscribed 64-gon of radius 10
  EXPECT_NEAR(ci, 0.5 * 64 * 100 * std::sin(2 * std::numbers::pi / 64), 1e-9);
  double prev = sq + 1;
  for (int i = 0; i < kSquircleShapes; ++i) {
    const double a = polygon_area(interpolate_shape(i / 19.0));
    EXPECT_LT(a, prev);
    prev = a;
  }
}

TEST(Rasterize, SquareMatchesMaxNormOracle) {
  const auto img = rasterize(make_square_boundary(kBoundaryPoints), 0, 0);
  EXPECT_EQ(img, centered_square_oracle());
  EXPECT_GE(img.count(), 361);
  EXPECT_LE(img.count(), 441);
}

TEST(Rasterize, CircleMatchesRadiusOracleAwayFromEdge) {
  const auto img = rasterize(make_circle_boundary(kBoundaryPoints), 0, 0);
  for (int r = 0; r < kCanvasSize; ++r)
    for (int c = 0; c < kCanvasSize; ++c) {
      const double d = std::hypot(c + 0.5 - kCanvasCenter, r + 0.5 - kCanvasCenter);
      if (d < 9.9) EXPECT_EQ(img.at(r, c), 1) << r << "," << c;
      if (d > 10.0) EXPECT_EQ(img.at(r, c), 0) << r << "," << c;
    }
}

TEST(Rasterize, IntegerShiftIsExactTranslation) {
  for (double alpha : {0.0, 0.37, 1.0}) {
    const auto b = interpolate_shape(alpha);
    EXPECT_EQ(rasterize(b, 3, 0), rasterize(b, 0, 0).shifted(3, 0));
    EXPECT_EQ(rasterize(b, -5, 7), rasterize(b, 0, 0).shifted(-5, 7));
  }
}

TEST(Rasterize, CircleIsMirrorSymmetric) {
  const auto img = rasterize(make_circle_boundary(kBoundaryPoints), 0, 0);
  EXPECT_EQ(img, img.mirrored_horizontally());
}

TEST(Rasterize, OutOfCanvasThrows) {
  const auto b = make_square_boundary(kBoundaryPoints);
  EXPECT_THROW(rasterize(b, 30, 0), OutOfBoundsError);
  EXPECT_THROW(rasterize(b, 0, -23), OutOfBoundsError);
  EXPECT_NO_THROW(rasterize(b, 22, -22));
}

TEST(DSprites, IdentityFactorsGiveCenteredSquare) {
  DSpritesFactors f{SpriteShape::square, 5, 0, kSpriteCenterIndex, kSpriteCenterIndex};
  EXPECT_EQ(render_dsprites(f), centered_square_oracle());
}

TEST(DSprites, QuarterTurnPreservesSquareArea) {
  DSpritesFactors f{SpriteShape::square, 5, 0, 16, 16};
  const int base = render_dsprites(f).count();
  f.orientation = 10;
  EXPECT_NEAR(render_dsprites(f).count(), base, 0.02 * base);
}

TEST(DSprites, AnyRotationKeepsAreaWithinRasterError) {
  for (auto shape : {SpriteShape::square, SpriteShape::ellipse, SpriteShape::heart}) {
    DSpritesFactors f{shape, 5, 0, 16, 16};
    const double area = polygon_area(sprite_boundary(shape));
    for (int o = 0; o < kSpriteOrientations; ++o) {
      f.orientation = o;
      EXPECT_NEAR(render_dsprites(f).count(), area, 0.06 * area) << to_string(shape) << " o=" << o;
    }
  }
}

TEST(DSprites, HalfScaleQuartersArea) {
  DSpritesFactors big{SpriteShape::square, 5, 0, 16, 16};
  DSpritesFactors small{SpriteShape::square, 0, 0, 16, 16};
  EXPECT_DOUBLE_EQ(sprite_scale_multiplier(0), 0.5);
  const double ratio =
      static_cast<double>(render_dsprites(small).count()) / render_dsprites(big).count();
  EXPECT_NEAR(ratio, 0.25, 0.025);
}

TEST(DSprites, PositionIsTranslation) {
  DSpritesFactors f{SpriteShape::heart, 3, 7, 10, 20};
  DSpritesFactors g = f;
  g.x_pos = 14;
  g.y_pos = 18;
  EXPECT_EQ(render_dsprites(g), render_dsprites(f).shifted(4, -2));
}

TEST(DSprites, ExtremeFactorsStayInCanvas) {
  for (auto shape : {SpriteShape::square, SpriteShape::ellipse, SpriteShape::heart})
    for (int o = 0; o < kSpriteOrientations; ++o)
      for (int x : {0, 31})
        for (int y : {0, 31}) {
          const auto img = render_dsprites({shape, 5, o, x, y});
          EXPECT_GT(img.count(), 0);
        }
}

TEST(DSprites, ValidateRejectsOutOfRange) {
  EXPECT_THROW(validate(DSpritesFactors{SpriteShape::square, 6, 0, 0, 0}), ParameterError);
  EXPECT_THROW(validate(DSpritesFactors{SpriteShape::square, 0, 40, 0, 0}), ParameterError);
  EXPECT_THROW(validate(DSpritesFactors{SpriteShape::square, 0, 0, 32, 0}), ParameterError);
}

TEST(Squircle, ShiftGridIsTwoPixelTranslation) {
  const auto a = render_squircle({7, 0, 0});
  const auto b = render_squircle({7, 9, 9});
  EXPECT_EQ(b, a.shifted(18, 18));
  EXPECT_EQ(render_squircle({7, 4, 1}), a.shifted(8, 2));
}

TEST(Squircle, EndpointsMatchDirectShapes) {
  EXPECT_EQ(render_squircle({0, 0, 0}), rasterize(make_square_boundary(kBoundaryPoints), -9, -9));
  EXPECT_EQ(render_squircle({19, 5, 5}), rasterize(make_circle_boundary(kBoundaryPoints), 1, 1));
}

TEST(Squircle, RenderIsDeterministic) {
  EXPECT_EQ(render_squircle({11, 3, 6}), render_squircle({11, 3, 6}));
  EXPECT_THROW(render_squircle({20, 0, 0}), ParameterError);
}

TEST(Pgm, HeaderAndValues) {
  BinaryImage img;
  img.set(0, 1, 1);
  const std::string pgm = to_pgm(img);
  EXPECT_EQ(pgm.rfind("P2\n64 64\n255\n", 0), 0u);
  EXPECT_NE(pgm.find("0 255 0"), std::string::npos);
}

TEST(BinaryImage, ShiftDropsPixelsLeavingCanvas) {
  BinaryImage img;
  img.set(5, 63, 1);
  img.set(5, 10, 1);
  const auto s = img.shifted(1, 0);
  EXPECT_EQ(s.count(), 1);
  EXPECT_EQ(s.at(5, 11), 1);
  EXPECT_EQ(img.active_indices(), (std::vector<int>{5 * 64 + 10, 5 * 64 + 63}));
}
