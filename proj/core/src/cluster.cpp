#include "ncdlab/cluster.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>

#include "ncdlab/errors.hpp"
#include "ncdlab/rng.hpp"

namespace ncdlab::cluster {

namespace {

constexpr double kMonotoneSlack = 1e-12;

struct RunResult {
  std::vector<int> assignments;
  RowMatrix centroids;
  double inertia = 0.0;
  int iterations = 0;
  std::vector<double> trace;
};

double squared_distance(const RowMatrix& a, Eigen::Index i, const RowMatrix& b, Eigen::Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

RowMatrix seed_plus_plus(const RowMatrix& x, int k, Rng& rng) {
  const Eigen::Index n = x.rows();
  RowMatrix c(k, x.cols());
  c.row(0) = x.row(static_cast<Eigen::Index>(rng.uniform_index(n)));
  std::vector<double> d2(n);
  for (Eigen::Index i = 0; i < n; ++i) d2[i] = squared_distance(x, i, c, 0);
  for (int j = 1; j < k; ++j) {
    double total = 0.0;
    for (double v : d2) total += v;
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double target = rng.uniform01() * total;
      double acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.uniform_index(n));
    }
    c.row(j) = x.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(x, i, c, j));
  }
  return c;
}

// Nearest-centroid assignment (lowest index wins ties). Empty clusters are
// moved onto the point farthest from its centroid and the pass repeats.
double assign(const RowMatrix& x, RowMatrix& c, std::vector<int>& a) {
  const Eigen::Index n = x.rows();
  const int k = static_cast<int>(c.rows());
  std::vector<double> dist(n);
  for (int attempt = 0; attempt <= k; ++attempt) {
    std::vector<int> sizes(k, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance(x, i, c, 0);
      for (int j = 1; j < k; ++j) {
        double d = squared_distance(x, i, c, j);
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      a[i] = best;
      dist[i] = best_d;
      ++sizes[best];
    }
    auto empty = std::find(sizes.begin(), sizes.end(), 0);
    if (empty == sizes.end() || attempt == k) break;
    Eigen::Index far = -1;
    for (Eigen::Index i = 0; i < n; ++i)
      if (sizes[a[i]] > 1 && (far < 0 || dist[i] > dist[far])) far = i;
    if (far < 0 || dist[far] == 0.0) break;  // fewer distinct points than clusters
    c.row(empty - sizes.begin()) = x.row(far);
  }
  double inertia = 0.0;
  for (double d : dist) inertia += d;
  return inertia;
}

void update_means(const RowMatrix& x, const std::vector<int>& a, RowMatrix& c) {
  RowMatrix sums = RowMatrix::Zero(c.rows(), c.cols());
  std::vector<int> counts(c.rows(), 0);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    sums.row(a[i]) += x.row(i);
    ++counts[a[i]];
  }
  for (Eigen::Index j = 0; j < c.rows(); ++j)
    if (counts[j] > 0) c.row(j) = sums.row(j) / counts[j];
}

// Hartigan pass: move single points between clusters while that strictly lowers the
// objective, keeping centroids equal to the cluster means. Returns whether anything moved.
bool transfer_pass(const RowMatrix& x, RowMatrix& c, std::vector<int>& a) {
  const int k = static_cast<int>(c.rows());
  std::vector<int> counts(k, 0);
  for (int v : a) ++counts[v];
  update_means(x, a, c);
  bool moved = false;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const int from = a[i];
    if (counts[from] < 2) continue;
    const double n_from = counts[from];
    const double removal = n_from / (n_from - 1) * squared_distance(x, i, c, from);
    int to = -1;
    double best = removal * (1.0 - 1e-12);
    for (int j = 0; j < k; ++j) {
      if (j == from) continue;
      const double n_to = counts[j];
      const double cost = n_to / (n_to + 1) * squared_distance(x, i, c, j);
      if (cost < best) {
        best = cost;
        to = j;
      }
    }
    if (to < 0) continue;
    c.row(from) = (c.row(from) * n_from - x.row(i)) / (n_from - 1);
    c.row(to) = (c.row(to) * counts[to] + x.row(i)) / (counts[to] + 1.0);
    --counts[from];
    ++counts[to];
    a[i] = to;
    moved = true;
  }
  return moved;
}

void lloyd_steps(const RowMatrix& x, const KMeansConfig& cfg, RunResult& r) {
  std::vector<int> previous;
  for (int it = 0; it < cfg.max_iters; ++it) {
    previous = r.assignments;
    update_means(x, r.assignments, r.centroids);
    double next = assign(x, r.centroids, r.assignments);
    ++r.iterations;
    r.trace.push_back(next);
    if (next > r.inertia * (1.0 + kMonotoneSlack) + kMonotoneSlack)
      throw std::logic_error("k-means inertia increased during a Lloyd step");
    double prev = r.inertia;
    r.inertia = next;
    if (r.assignments == previous || prev == 0.0) break;
    if (prev - next < cfg.rel_tol * prev) break;
  }
}

RunResult lloyd(const RowMatrix& x, const KMeansConfig& cfg, Rng& rng) {
  RunResult r;
  r.centroids = seed_plus_plus(x, cfg.k, rng);
  r.assignments.assign(x.rows(), 0);
  r.inertia = assign(x, r.centroids, r.assignments);
  r.trace.push_back(r.inertia);
  lloyd_steps(x, cfg, r);
  for (int round = 0; round < cfg.max_iters && transfer_pass(x, r.centroids, r.assignments);
       ++round) {
    const double next = assign(x, r.centroids, r.assignments);
    r.trace.push_back(next);
    if (next > r.inertia * (1.0 + kMonotoneSlack) + kMonotoneSlack)
      throw std::logic_error("k-means inertia increased during a transfer pass");
    r.inertia = next;
    lloyd_steps(x, cfg, r);
  }
  return r;
}

}  // namespace

double inertia_of(const RowMatrix& points, std::span<const int> assignments,
                  const RowMatrix& centroids) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    total += squared_distance(points, i, centroids, assignments[i]);
  return total;
}

ClusterAssignment kmeans(const RowMatrix& points, const KMeansConfig& cfg) {
  if (cfg.k < 1) throw ParameterError("k must be positive");
  if (cfg.k > points.rows())
    throw ParameterError("k = " + std::to_string(cfg.k) + " exceeds the " +
                         std::to_string(points.rows()) + " points");
  if (cfg.restarts < 1 || cfg.max_iters < 1 || !(cfg.rel_tol > 0.0))
    throw ParameterError("restarts, max_iters and rel_tol must be positive");
  if (!points.allFinite()) throw ParameterError("features contain non-finite values");

  RowMatrix x = points;
  if (cfg.normalize) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      double norm = x.row(i).norm();
      if (norm > 0.0) x.row(i) /= norm;
    }
  }

  ClusterAssignment best;
  bool have = false;
  for (int restart = 0; restart < cfg.restarts; ++restart) {
    Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(restart)}));
    auto run = lloyd(x, cfg, rng);
    best.restart_inertias.push_back(run.inertia);
    if (!have || run.inertia < best.inertia) {
      have = true;
      best.assignments = std::move(run.assignments);
      best.centroids = std::move(run.centroids);
      best.inertia = run.inertia;
      best.restart = restart;
      best.iterations = run.iterations;
      best.inertia_trace = std::move(run.trace);
    }
  }
  return best;
}

ClusterAssignment kmeans(const FeatureMatrix& features, const KMeansConfig& cfg) {
  return kmeans(features.values, cfg);
}

LabelMap majority_label_map(const ClusterAssignment& assignment, std::span<const int> true_labels,
                            std::uint64_t seed) {
  if (true_labels.size() != assignment.assignments.size())
    throw ParameterError("labels and assignments differ in length");
  const int k = assignment.k();
  std::vector<std::map<int, int>> counts(k);
  for (std::size_t i = 0; i < true_labels.size(); ++i)
    ++counts[assignment.assignments[i]][true_labels[i]];

  LabelMap map;
  map.method = LabelMapMethod::majority;
  map.cluster_to_label.resize(k);
  for (int c = 0; c < k; ++c) {
    if (counts[c].empty())
      throw std::logic_error("cluster " + std::to_string(c) + " is empty");
    int top = 0;
    for (const auto& [label, n] : counts[c]) top = std::max(top, n);
    std::vector<int> tied;
    for (const auto& [label, n] : counts[c])
      if (n == top) tied.push_back(label);
    if (tied.size() == 1) {
      map.cluster_to_label[c] = tied.front();
    } else {
      Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(c)}));
      map.cluster_to_label[c] = tied[rng.uniform_index(tied.size())];
    }
  }
  return map;
}

Contingency contingency(const ClusterAssignment& assignment, std::span<const int> true_labels) {
  if (true_labels.size() != assignment.assignments.size())
    throw ParameterError("labels and assignments differ in length");
  Contingency t;
  t.labels.assign(true_labels.begin(), true_labels.end());
  std::sort(t.labels.begin(), t.labels.end());
  t.labels.erase(std::unique(t.labels.begin(), t.labels.end()), t.labels.end());
  t.counts.assign(assignment.k(), std::vector<long>(t.labels.size(), 0));
  for (std::size_t i = 0; i < true_labels.size(); ++i) {
    auto col = std::lower_bound(t.labels.begin(), t.labels.end(), true_labels[i]) - t.labels.begin();
    ++t.counts[assignment.assignments[i]][col];
  }
  return t;
}

std::vector<int> max_weight_matching(const std::vector<std::vector<long>>& weights) {
  const int n = static_cast<int>(weights.size());
  for (const auto& row : weights)
    if (static_cast<int>(row.size()) != n) throw ParameterError("weight matrix must be square");
  if (n == 0) return {};
  long top = 0;
  for (const auto& row : weights)
    for (long w : row) top = std::max(top, w);

  // Min-cost form, 1-based potentials.
  const long inf = std::numeric_limits<long>::max() / 4;
  std::vector<long> u(n + 1, 0), v(n + 1, 0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<long> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      int i0 = p[j0];
      long delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        long cur = (top - weights[i0 - 1][j - 1]) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n);
  for (int j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

LabelMap one_to_one_label_map(const ClusterAssignment& assignment,
                              std::span<const int> true_labels) {
  auto table = contingency(assignment, true_labels);
  if (static_cast<int>(table.labels.size()) != assignment.k())
    throw ParameterError("one-to-one mapping needs as many clusters (" +
                         std::to_string(assignment.k()) + ") as true labels (" +
                         std::to_string(table.labels.size()) + ")");
  auto match = max_weight_matching(table.counts);
  LabelMap map;
  map.method = LabelMapMethod::one_to_one;
  for (int col : match) map.cluster_to_label.push_back(table.labels[col]);
  return map;
}

std::vector<int> predict_labels(const ClusterAssignment& assignment, const LabelMap& map) {
  if (static_cast<int>(map.cluster_to_label.size()) != assignment.k())
    throw ParameterError("label map does not cover every cluster");
  std::vector<int> out;
  out.reserve(assignment.assignments.size());
  for (int c : assignment.assignments) out.push_back(map.cluster_to_label[c]);
  return out;
}

void write_cluster_dump_csv(std::ostream& out, const ClusterAssignment& assignment,
                            std::span<const int> predicted, std::span<const int> true_labels) {
  const auto n = assignment.assignments.size();
  if (predicted.size() != n || true_labels.size() != n)
    throw ParameterError("cluster dump columns differ in length");
  out << "point_id,cluster_id,predicted_label,true_label\n";
  for (std::size_t i = 0; i < n; ++i)
    out << i << ',' << assignment.assignments[i] << ',' << predicted[i] << ',' << true_labels[i]
        << '\n';
}

}  // namespace ncdlab::cluster
