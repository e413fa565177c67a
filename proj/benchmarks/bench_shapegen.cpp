#include <benchmark/benchmark.h>

#include "ncdlab/shapegen.hpp"

using namespace ncdlab::shapegen;

static void BM_RasterizeSquircle(benchmark::State& state) {
  const auto boundary = interpolate_shape(0.5);
  for (auto _ : state) benchmark::DoNotOptimize(rasterize(boundary, 3, -2));
}
BENCHMARK(BM_RasterizeSquircle);

static void BM_RenderDSpritesRotated(benchmark::State& state) {
  DSpritesFactors f{SpriteShape::heart, 3, 7, 10, 20};
  for (auto _ : state) {
    f.orientation = (f.orientation + 1) % kSpriteOrientations;
    benchmark::DoNotOptimize(render_dsprites(f));
  }
}
BENCHMARK(BM_RenderDSpritesRotated);
