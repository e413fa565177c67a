#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "ncdlab/errors.hpp"
#include "ncdlab/nnet.hpp"
#include "ncdlab/rng.hpp"

using namespace ncdlab;
using namespace ncdlab::nnet;
using shapegen::BinaryImage;

namespace {

std::vector<BinaryImage> random_sprites(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<BinaryImage> out;
  for (int i = 0; i < n; ++i) {
    shapegen::DSpritesFactors f{static_cast<shapegen::SpriteShape>(rng.uniform_index(3)),
                                rng.uniform_int(0, 5), rng.uniform_int(0, 39),
                                rng.uniform_int(0, 31), rng.uniform_int(0, 31)};
    out.push_back(shapegen::render_dsprites(f));
  }
  return out;
}

// squares on the left vs the right edge, random heights
expdesign::LabeledDataset separable_set(int per_class, std::uint64_t seed) {
  Rng rng(seed);
  expdesign::LabeledDataset d;
  for (int i = 0; i < 2 * per_class; ++i) {
    const int cls = i % 2;
    shapegen::DSpritesFactors f{shapegen::SpriteShape::square, 2, 0, cls ? 28 : 3,
                                rng.uniform_int(0, 31)};
    d.samples.push_back({shapegen::render_dsprites(f), {}, cls * 7, true});
  }
  return d;
}

}  // namespace

TEST(Params, CountFormula) {
  // 4096*256+256 + 256*64+64 + 64*5+5
  EXPECT_EQ(count_parameters(4096, {256, 64}, 5), 1065605u);
  EXPECT_EQ(count_parameters(4096, {8}, 2), 32794u);
  NetConfig cfg;
  cfg.hidden_widths = {8};
  EXPECT_EQ(init_model(cfg).param_count(), 32794u);
}

TEST(Params, ConfigValidation) {
  NetConfig cfg;
  cfg.hidden_widths = {};
  EXPECT_THROW(cfg.validate(), ParameterError);
  cfg = {};
  cfg.learning_rate = 0;
  EXPECT_THROW(cfg.validate(), ParameterError);
  cfg = {};
  cfg.n_outputs = 0;
  EXPECT_THROW(cfg.validate(), ParameterError);
}

TEST(Init, SeedDeterminesWeights) {
  NetConfig cfg;
  cfg.hidden_widths = {16, 8};
  cfg.seed = 3;
  EXPECT_EQ(init_model(cfg).parameters(), init_model(cfg).parameters());
  auto other = cfg;
  other.seed = 4;
  EXPECT_NE(init_model(cfg).parameters(), init_model(other).parameters());
  const auto m = init_model(cfg);
  EXPECT_TRUE(m.bias(0).isZero());
  EXPECT_EQ(m.weights(1).rows(), 8);
  EXPECT_EQ(m.weights(1).cols(), 16);
}

TEST(Loss, ZeroOutputWeightsGiveLogN) {
  NetConfig cfg;
  cfg.hidden_widths = {16};
  cfg.n_outputs = 5;
  auto m = init_model(cfg);
  m.weights(m.layer_count() - 1).setZero();
  const auto imgs = random_sprites(7, 1);
  const std::vector<int> y{0, 1, 2, 3, 4, 0, 1};
  const auto lg = loss_and_grad(m, imgs, y);
  EXPECT_NEAR(lg.loss, std::log(5.0), 1e-12);
}

TEST(Loss, GradientMatchesFiniteDifferences) {
  NetConfig cfg;
  cfg.hidden_widths = {16, 8};
  cfg.n_outputs = 3;
  cfg.seed = 11;
  auto m = init_model(cfg);
  const auto imgs = random_sprites(10, 2);
  const std::vector<int> y{0, 1, 2, 0, 1, 2, 0, 1, 2, 0};
  const auto sets = to_active_sets(imgs);
  const auto lg = loss_and_grad(m, sets, y);
  const double h = 1e-5;
  Rng rng(5);
  for (int t = 0; t < 400; ++t) {
    // bias toward parameters that receive gradient
    std::size_t i;
    if (t % 2 == 0) {
      const int r = sets[rng.uniform_index(sets.size())][0];
      i = m.layers()[0].weight_offset + static_cast<std::size_t>(r) * 16 + rng.uniform_index(16);
    } else {
      i = m.layers()[0].bias_offset + rng.uniform_index(m.param_count() - m.layers()[0].bias_offset);
    }
    const double orig = m.parameters()[i];
    m.parameters()[i] = orig + h;
    const double up = mean_loss(m, sets, y);
    m.parameters()[i] = orig - h;
    const double down = mean_loss(m, sets, y);
    m.parameters()[i] = orig;
    const double fd = (up - down) / (2 * h);
    const double denom = std::max({std::abs(fd), std::abs(lg.gradient[i]), 1e-6});
    EXPECT_LT(std::abs(fd - lg.gradient[i]) / denom, 1e-4) << "param " << i;
  }
}

TEST(Loss, DuplicatedBatchHasSameMeanGradient) {
  NetConfig cfg;
  cfg.hidden_widths = {12};
  cfg.n_outputs = 2;
  const auto m = init_model(cfg);
  auto imgs = random_sprites(5, 3);
  std::vector<int> y{0, 1, 1, 0, 1};
  const auto a = loss_and_grad(m, imgs, y);
  imgs.insert(imgs.end(), imgs.begin(), imgs.end());
  y.insert(y.end(), y.begin(), y.end());
  const auto b = loss_and_grad(m, imgs, y);
  EXPECT_NEAR(a.loss, b.loss, 1e-12);
  EXPECT_LT((a.gradient - b.gradient).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(Loss, RejectsLabelOutOfRange) {
  NetConfig cfg;
  cfg.hidden_widths = {4};
  const auto imgs = random_sprites(2, 1);
  const std::vector<int> y{0, 2};
  EXPECT_THROW(loss_and_grad(init_model(cfg), imgs, y), ParameterError);
}

TEST(Train, SeparableTaskConverges) {
  NetConfig cfg;
  cfg.hidden_widths = {32};
  cfg.max_epochs = 50;
  cfg.target_train_accuracy = 0.99;
  cfg.seed = 1;
  const auto data = separable_set(60, 4);
  const auto m = train(init_model(cfg), data, cfg);
  ASSERT_FALSE(m.training_log.empty());
  EXPECT_LE(m.training_log.size(), 50u);
  EXPECT_GE(m.training_log.back().accuracy, 0.99);
  EXPECT_LT(m.training_log.back().loss, std::log(2.0));
  EXPECT_EQ(output_labels(data), (std::vector<int>{0, 7}));
}

TEST(Train, ZeroEpochsReturnsInitialModel) {
  NetConfig cfg;
  cfg.hidden_widths = {8};
  cfg.max_epochs = 0;
  const auto init = init_model(cfg);
  const auto m = train(init, separable_set(10, 1), cfg);
  EXPECT_EQ(m.parameters(), init.parameters());
  EXPECT_TRUE(m.training_log.empty());
}

TEST(Train, Deterministic) {
  NetConfig cfg;
  cfg.hidden_widths = {16};
  cfg.max_epochs = 5;
  cfg.target_train_accuracy = 1.0;
  cfg.batch_size = 16;
  const auto data = separable_set(30, 2);
  const auto a = train(init_model(cfg), data, cfg);
  const auto b = train(init_model(cfg), data, cfg);
  EXPECT_EQ(a.parameters(), b.parameters());
}

TEST(Train, LossTrendsDown) {
  NetConfig cfg;
  cfg.hidden_widths = {32, 8};
  cfg.n_outputs = 3;
  cfg.max_epochs = 12;
  cfg.target_train_accuracy = 1.0;
  cfg.batch_size = 32;
  // shape labels under random pose: not separable in a couple of epochs
  Rng rng(9);
  expdesign::LabeledDataset data;
  for (int i = 0; i < 150; ++i) {
    const int shape = i % 3;
    shapegen::DSpritesFactors f{static_cast<shapegen::SpriteShape>(shape), rng.uniform_int(0, 5),
                                rng.uniform_int(0, 39), rng.uniform_int(0, 31),
                                rng.uniform_int(0, 31)};
    data.samples.push_back({shapegen::render_dsprites(f), {}, shape, true});
  }
  const auto m = train(init_model(cfg), data, cfg);
  const auto& log = m.training_log;
  ASSERT_GE(log.size(), 6u);
  // three-epoch moving average
  double prev = 1e300;
  for (std::size_t i = 2; i < log.size(); i += 3) {
    const double avg = (log[i].loss + log[i - 1].loss + log[i - 2].loss) / 3;
    EXPECT_LE(avg, prev + 1e-9);
    prev = avg;
  }
}

TEST(Features, ShapeAndNonNegative) {
  NetConfig cfg;
  cfg.hidden_widths = {20, 6};
  const auto m = init_model(cfg);
  auto imgs = random_sprites(9, 8);
  imgs.push_back(imgs[0]);
  const auto f = extract_features(m, imgs);
  EXPECT_EQ(f.values.rows(), 10);
  EXPECT_EQ(f.values.cols(), 6);
  EXPECT_GE(f.values.minCoeff(), 0.0);
  EXPECT_EQ(f.values.row(0), f.values.row(9));
}

TEST(Features, DatasetOverloadCarriesLabels) {
  NetConfig cfg;
  cfg.hidden_widths = {4};
  const auto data = separable_set(3, 1);
  const auto f = extract_features(init_model(cfg), data);
  EXPECT_EQ(f.labels, data.labels());
}

TEST(Capacity, GridEntries) {
  const auto g = capacity_grid({{8}, {256, 64}}, 2);
  ASSERT_EQ(g.size(), 2u);
  EXPECT_DOUBLE_EQ(g[0].params_per_known_class, 16397.0);
  EXPECT_EQ(g[0].config.n_outputs, 2);
  const auto g5 = capacity_grid({{256, 64}, {4}, {16}}, 5);
  EXPECT_EQ(g5.size(), 3u);
  EXPECT_DOUBLE_EQ(g5[0].params_per_known_class, 213121.0);
}

TEST(Checkpoint, RoundTrip) {
  NetConfig cfg;
  cfg.hidden_widths = {8, 4};
  cfg.n_outputs = 3;
  cfg.seed = 77;
  auto m = init_model(cfg);
  m.training_log = {{1, 0.5, 0.75}, {2, 0.25, 1.0}};
  std::stringstream buf;
  save_checkpoint(m, buf);
  const auto r = load_checkpoint(buf);
  EXPECT_EQ(r.parameters(), m.parameters());
  EXPECT_EQ(r.config().hidden_widths, cfg.hidden_widths);
  EXPECT_EQ(r.config().seed, 77u);
  ASSERT_EQ(r.training_log.size(), 2u);
  EXPECT_EQ(r.training_log[1].loss, 0.25);
}

TEST(Checkpoint, RejectsCorruptInput) {
  std::stringstream bad("NOTAMODEL");
  EXPECT_THROW(load_checkpoint(bad), IoError);
  NetConfig cfg;
  cfg.hidden_widths = {4};
  std::stringstream buf;
  save_checkpoint(init_model(cfg), buf);
  std::string bytes = buf.str();
  bytes.resize(bytes.size() / 2);
  std::stringstream truncated(bytes);
  EXPECT_THROW(load_checkpoint(truncated), IoError);
}
