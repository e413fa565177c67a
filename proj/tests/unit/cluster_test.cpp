#include <algorithm>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "ncdlab/cluster.hpp"
#include "ncdlab/errors.hpp"
#include "ncdlab/rng.hpp"
#include "common/oracles.hpp"

using namespace ncdlab;
using namespace ncdlab::cluster;

namespace {

RowMatrix rows(std::initializer_list<std::initializer_list<double>> values) {
  RowMatrix m(static_cast<Eigen::Index>(values.size()),
              static_cast<Eigen::Index>(values.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : values) {
    Eigen::Index c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

ClusterAssignment fixed_assignment(std::vector<int> a, int k) {
  ClusterAssignment out;
  out.assignments = std::move(a);
  out.centroids = RowMatrix::Zero(k, 1);
  return out;
}

}  // namespace

TEST(KMeans, DistinctPointsEachOwnCluster) {
  const auto x = rows({{0, 0}, {100, 0}, {0, 100}});
  const auto r = kmeans(x, {.k = 3, .seed = 1});
  EXPECT_DOUBLE_EQ(r.inertia, 0.0);
  std::vector<int> sorted = r.assignments;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, (std::vector<int>{0, 1, 2}));
}

TEST(KMeans, SingleClusterIsMean) {
  const auto x = rows({{1, 2}, {3, 6}, {5, 1}, {-1, 3}});
  const auto r = kmeans(x, {.k = 1});
  EXPECT_NEAR(r.centroids(0, 0), 2.0, 1e-12);
  EXPECT_NEAR(r.centroids(0, 1), 3.0, 1e-12);
  const double expected = (1 + 1) + (1 + 9) + (9 + 4) + (9 + 0);
  EXPECT_NEAR(r.inertia, expected, 1e-12);
}

TEST(KMeans, MatchesExhaustiveOptimumOnSmallInstances) {
  Rng rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = rng.uniform_int(3, 8);
    const int d = rng.uniform_int(1, 2);
    const int k = rng.uniform_int(1, 3);
    RowMatrix x(n, d);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) x(i, j) = rng.normal() * 5;
    const auto r = kmeans(x, {.k = k, .seed = rng.next()});
    EXPECT_NEAR(r.inertia, oracle::brute_force_inertia(x, k), 1e-9) << "trial " << trial;
  }
}

TEST(KMeans, InertiaTraceIsMonotone) {
  Rng rng(7);
  RowMatrix x(200, 3);
  for (int i = 0; i < 200; ++i)
    for (int j = 0; j < 3; ++j) x(i, j) = rng.normal() + (i % 4) * 2.0;
  const auto r = kmeans(x, {.k = 4, .restarts = 3, .seed = 9});
  ASSERT_FALSE(r.inertia_trace.empty());
  for (std::size_t i = 1; i < r.inertia_trace.size(); ++i)
    EXPECT_LE(r.inertia_trace[i], r.inertia_trace[i - 1] + 1e-9);
  EXPECT_EQ(r.restart_inertias.size(), 3u);
  EXPECT_DOUBLE_EQ(r.inertia, *std::min_element(r.restart_inertias.begin(), r.restart_inertias.end()));
  EXPECT_NEAR(r.inertia, inertia_of(x, r.assignments, r.centroids), 1e-6);
}

TEST(KMeans, AssignmentsAreNearestCentroid) {
  Rng rng(3);
  RowMatrix x(60, 2);
  for (int i = 0; i < 60; ++i)
    for (int j = 0; j < 2; ++j) x(i, j) = rng.uniform01() * 10;
  const auto r = kmeans(x, {.k = 3, .seed = 1});
  for (int i = 0; i < 60; ++i) {
    const double own = (x.row(i) - r.centroids.row(r.assignments[i])).squaredNorm();
    for (int c = 0; c < 3; ++c) EXPECT_LE(own, (x.row(i) - r.centroids.row(c)).squaredNorm() + 1e-12);
  }
}

TEST(KMeans, DeterministicAndRejectsBadK) {
  const auto x = rows({{0}, {1}, {5}, {6}, {10}});
  const auto a = kmeans(x, {.k = 2, .seed = 4});
  const auto b = kmeans(x, {.k = 2, .seed = 4});
  EXPECT_EQ(a.assignments, b.assignments);
  EXPECT_THROW(kmeans(x, {.k = 6}), ParameterError);
  EXPECT_THROW(kmeans(x, {.k = 0}), ParameterError);
}

TEST(LabelMap, MajorityPicksMode) {
  const auto a = fixed_assignment({0, 0, 0}, 1);
  const std::vector<int> y{4, 4, 9};
  EXPECT_EQ(majority_label_map(a, y, 0).cluster_to_label, (std::vector<int>{4}));
}

TEST(LabelMap, MajorityTieIsSeededAndReproducible) {
  const auto a = fixed_assignment({0, 0}, 1);
  const std::vector<int> y{1, 2};
  std::set<int> seen;
  for (std::uint64_t s = 0; s < 32; ++s) {
    const int pick = majority_label_map(a, y, s).cluster_to_label[0];
    EXPECT_TRUE(pick == 1 || pick == 2);
    EXPECT_EQ(pick, majority_label_map(a, y, s).cluster_to_label[0]);
    seen.insert(pick);
  }
  EXPECT_EQ(seen.size(), 2u);
}

TEST(LabelMap, MajorityAllowsCollisions) {
  const auto a = fixed_assignment({0, 0, 1, 1, 1}, 2);
  const std::vector<int> y{3, 3, 3, 3, 5};
  EXPECT_EQ(majority_label_map(a, y, 0).cluster_to_label, (std::vector<int>{3, 3}));
}

TEST(LabelMap, HungarianTwoByTwo) {
  const std::vector<std::vector<long>> w{{9, 1}, {2, 8}};
  EXPECT_EQ(max_weight_matching(w), (std::vector<int>{0, 1}));
  std::vector<int> assign, y;
  for (int c = 0; c < 2; ++c)
    for (int l = 0; l < 2; ++l)
      for (long i = 0; i < w[c][l]; ++i) {
        assign.push_back(c);
        y.push_back(l == 0 ? 10 : 20);
      }
  const auto map = one_to_one_label_map(fixed_assignment(assign, 2), y);
  const auto pred = predict_labels(fixed_assignment(assign, 2), map);
  int correct = 0;
  for (std::size_t i = 0; i < y.size(); ++i) correct += pred[i] == y[i];
  EXPECT_EQ(correct, 17);
}

TEST(LabelMap, HungarianMatchesPermutationOracle) {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = rng.uniform_int(1, 5);
    std::vector<std::vector<long>> w(n, std::vector<long>(n));
    for (auto& row : w)
      for (auto& v : row) v = static_cast<long>(rng.uniform_index(20));
    const auto m = max_weight_matching(w);
    long total = 0;
    std::vector<int> used(n, 0);
    for (int i = 0; i < n; ++i) {
      total += w[i][m[i]];
      ++used[m[i]];
    }
    EXPECT_EQ(total, oracle::brute_force_matching(w));
    for (int u : used) EXPECT_EQ(u, 1);
  }
}

TEST(LabelMap, PerfectClusteringMapsToTruth) {
  const auto a = fixed_assignment({1, 1, 0, 0, 2}, 3);
  const std::vector<int> y{5, 5, 8, 8, 2};
  for (const auto& map : {majority_label_map(a, y, 0), one_to_one_label_map(a, y)})
    EXPECT_EQ(predict_labels(a, map), y);
  EXPECT_THROW(one_to_one_label_map(fixed_assignment({0, 1, 1}, 2), std::vector<int>{1, 1, 1}),
               ParameterError);
}

TEST(LabelMap, SingleClusterPredictsOneLabel) {
  const auto a = fixed_assignment({0, 0, 0, 0}, 1);
  const std::vector<int> y{1, 2, 2, 3};
  const auto pred = predict_labels(a, majority_label_map(a, y, 0));
  EXPECT_EQ(pred, (std::vector<int>{2, 2, 2, 2}));
}

TEST(Dump, CsvHasRowPerPoint) {
  const auto a = fixed_assignment({0, 1}, 2);
  std::ostringstream out;
  const std::vector<int> pred{3, 4}, truth{3, 5};
  write_cluster_dump_csv(out, a, pred, truth);
  const std::string csv = out.str();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}
