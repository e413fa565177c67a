#include <sstream>

#include <gtest/gtest.h>

#include "ncdlab/errors.hpp"
#include "ncdlab/metrics.hpp"
#include "ncdlab/rng.hpp"

using namespace ncdlab;
using namespace ncdlab::metrics;

TEST(Evaluate, PerfectPredictions) {
  const std::vector<int> y{0, 0, 1, 1};
  const auto r = evaluate(y, y);
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.precision_macro, 1.0);
  EXPECT_EQ(r.recall_macro, 1.0);
}

TEST(Evaluate, HandCountedExample) {
  const std::vector<int> truth{0, 0, 1, 1};
  const std::vector<int> pred{0, 1, 1, 1};
  const auto r = evaluate(pred, truth);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.75);
  ASSERT_EQ(r.per_class.size(), 2u);
  EXPECT_DOUBLE_EQ(r.per_class[0].recall, 0.5);
  EXPECT_DOUBLE_EQ(r.per_class[1].recall, 1.0);
  EXPECT_DOUBLE_EQ(r.per_class[0].precision, 1.0);
  EXPECT_DOUBLE_EQ(r.per_class[1].precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.recall_macro, 0.75);
  EXPECT_NEAR(r.precision_macro, 0.8333333333, 1e-9);
}

TEST(Evaluate, NeverPredictedClassHasZeroPrecision) {
  const std::vector<int> truth{0, 1, 2};
  const std::vector<int> pred{0, 0, 0};
  const auto r = evaluate(pred, truth);
  EXPECT_DOUBLE_EQ(r.per_class[1].precision, 0.0);
  EXPECT_DOUBLE_EQ(r.precision_macro, (1.0 / 3.0) / 3.0);
}

TEST(Evaluate, BalancedAccuracyEqualsMacroRecall) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const int classes = rng.uniform_int(2, 6);
    const int per = rng.uniform_int(1, 20);
    std::vector<int> truth, pred;
    for (int c = 0; c < classes; ++c)
      for (int i = 0; i < per; ++i) {
        truth.push_back(c);
        pred.push_back(static_cast<int>(rng.uniform_index(classes + 1)));
      }
    const auto r = evaluate(pred, truth);
    EXPECT_NEAR(r.accuracy, r.recall_macro, 1e-12);
    for (double v : {r.accuracy, r.precision_macro, r.recall_macro}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Evaluate, LabelRenamingInvariance) {
  const std::vector<int> truth{0, 0, 1, 1, 2, 2};
  const std::vector<int> pred{0, 1, 1, 2, 2, 2};
  const std::vector<int> perm{7, 3, 5};
  std::vector<int> t2, p2;
  for (int v : truth) t2.push_back(perm[v]);
  for (int v : pred) p2.push_back(perm[v]);
  const auto a = evaluate(pred, truth);
  const auto b = evaluate(p2, t2);
  EXPECT_DOUBLE_EQ(a.accuracy, b.accuracy);
  EXPECT_DOUBLE_EQ(a.precision_macro, b.precision_macro);
  EXPECT_DOUBLE_EQ(a.recall_macro, b.recall_macro);
}

TEST(Evaluate, RejectsMismatchedInput) {
  const std::vector<int> a{0, 1}, b{0};
  EXPECT_THROW(evaluate(a, b), ParameterError);
  EXPECT_THROW(evaluate(std::vector<int>{}, std::vector<int>{}), ParameterError);
}

namespace {

MetricsRow row(int nk, int nu, std::uint64_t seed, double acc) {
  MetricsRow r;
  r.key.experiment_id = "A-x_pos";
  r.key.class_factor = "x_pos";
  r.key.n_known = nk;
  r.key.n_unknown = nu;
  r.key.seed = seed;
  r.accuracy = acc;
  r.precision_macro = acc / 2;
  r.recall_macro = acc;
  return r;
}

}  // namespace

TEST(Aggregate, SingleAndAveraged) {
  const std::vector<MetricsRow> one{row(2, 1, 0, 0.7)};
  const auto a = aggregate_group(one);
  ASSERT_FALSE(a.empty());
  for (const auto& p : a) EXPECT_DOUBLE_EQ(p.mean_accuracy, 0.7);

  const std::vector<MetricsRow> two{row(3, 2, 0, 0.4), row(3, 2, 1, 0.6), row(3, 1, 0, 1.0)};
  int checked = 0;
  for (const auto& p : aggregate_group(two)) {
    if (p.n_unknown == 2) {
      EXPECT_DOUBLE_EQ(p.mean_accuracy, 0.5);
      EXPECT_EQ(p.count, 2);
      ++checked;
    } else if (!p.n_unknown) {
      EXPECT_DOUBLE_EQ(p.mean_accuracy, 2.0 / 3.0);
      ++checked;
    }
  }
  EXPECT_EQ(checked, 2);
}

TEST(Csv, RoundTrip) {
  const std::vector<MetricsRow> rows{row(2, 1, 0, 0.125), row(8, 4, 2, 1.0)};
  std::stringstream buf;
  write_metrics_csv(buf, rows);
  const auto back = read_metrics_csv(buf);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].key.n_known, 8);
  EXPECT_EQ(back[1].key.seed, 2u);
  EXPECT_DOUBLE_EQ(back[0].accuracy, 0.125);
  EXPECT_EQ(back[0].key.experiment_id, "A-x_pos");
}
