#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "ncdlab/features.hpp"

namespace ncdlab::cluster {

struct KMeansConfig {
  int k = 1;
  int restarts = 10;
  int max_iters = 300;
  double rel_tol = 1e-6;
  std::uint64_t seed = 0;
  // L2-normalise feature rows before clustering. Off by default.
  bool normalize = false;
};

struct ClusterAssignment {
  std::vector<int> assignments;  // point -> cluster id in [0, k)
  RowMatrix centroids;           // k x d
  double inertia = 0.0;          // sum of squared distances to assigned centroids
  int restart = 0;               // index of the winning restart
  int iterations = 0;
  std::vector<double> inertia_trace;     // winning restart, one value per assignment step
  std::vector<double> restart_inertias;  // final inertia of every restart

  int k() const { return static_cast<int>(centroids.rows()); }
};

// k-means++ seeding, Lloyd iterations, then single-point transfer passes
// (each followed by more Lloyd steps) until no transfer lowers the inertia.
// Best of cfg.restarts by (inertia, restart index). Empty clusters are
// reseeded at the point farthest from its centroid.
ClusterAssignment kmeans(const RowMatrix& points, const KMeansConfig& cfg);
ClusterAssignment kmeans(const FeatureMatrix& features, const KMeansConfig& cfg);

double inertia_of(const RowMatrix& points, std::span<const int> assignments,
                  const RowMatrix& centroids);

enum class LabelMapMethod { majority, one_to_one };

struct LabelMap {
  std::vector<int> cluster_to_label;
  LabelMapMethod method = LabelMapMethod::majority;
};

// Each cluster takes its modal true label; ties are broken by a seeded uniform
// draw. Two clusters may map to the same label.
LabelMap majority_label_map(const ClusterAssignment& assignment, std::span<const int> true_labels,
                            std::uint64_t seed);

// Injective map maximising the number of correctly mapped points.
LabelMap one_to_one_label_map(const ClusterAssignment& assignment,
                              std::span<const int> true_labels);

std::vector<int> predict_labels(const ClusterAssignment& assignment, const LabelMap& map);

struct Contingency {
  std::vector<int> labels;               // distinct true labels, ascending
  std::vector<std::vector<long>> counts;  // [cluster][label index]
};

Contingency contingency(const ClusterAssignment& assignment, std::span<const int> true_labels);

// Hungarian algorithm on a square weight matrix; returns row -> column.
std::vector<int> max_weight_matching(const std::vector<std::vector<long>>& weights);

// CSV: point_id, cluster_id, predicted_label, true_label
void write_cluster_dump_csv(std::ostream& out, const ClusterAssignment& assignment,
                            std::span<const int> predicted, std::span<const int> true_labels);

}  // namespace ncdlab::cluster
