#include <benchmark/benchmark.h>

#include "ncdlab/nnet.hpp"
#include "ncdlab/rng.hpp"

using namespace ncdlab;

namespace {

std::vector<nnet::ActiveSet> batch(int n) {
  Rng rng(1);
  std::vector<shapegen::BinaryImage> imgs;
  for (int i = 0; i < n; ++i)
    imgs.push_back(shapegen::render_dsprites({shapegen::SpriteShape::heart, rng.uniform_int(0, 5),
                                              rng.uniform_int(0, 39), rng.uniform_int(0, 31),
                                              rng.uniform_int(0, 31)}));
  return nnet::to_active_sets(imgs);
}

}  // namespace

static void BM_LossAndGrad(benchmark::State& state) {
  nnet::NetConfig cfg;
  cfg.hidden_widths = {static_cast<int>(state.range(0)), 64};
  cfg.n_outputs = 8;
  const auto model = nnet::init_model(cfg);
  const auto inputs = batch(128);
  std::vector<int> labels(inputs.size());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 8);
  for (auto _ : state) benchmark::DoNotOptimize(nnet::loss_and_grad(model, inputs, labels));
  state.SetItemsProcessed(state.iterations() * 128);
}
BENCHMARK(BM_LossAndGrad)->Arg(64)->Arg(256);

static void BM_ExtractFeatures(benchmark::State& state) {
  nnet::NetConfig cfg;
  const auto model = nnet::init_model(cfg);
  Rng rng(2);
  std::vector<shapegen::BinaryImage> imgs;
  for (int i = 0; i < 600; ++i)
    imgs.push_back(shapegen::render_squircle({rng.uniform_int(0, 19), rng.uniform_int(0, 9),
                                              rng.uniform_int(0, 9)}));
  for (auto _ : state) benchmark::DoNotOptimize(nnet::extract_features(model, imgs));
  state.SetItemsProcessed(state.iterations() * 600);
}
BENCHMARK(BM_ExtractFeatures);
