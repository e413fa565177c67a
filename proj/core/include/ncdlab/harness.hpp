#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ncdlab/cluster.hpp"
#include "ncdlab/expdesign.hpp"
#include "ncdlab/metrics.hpp"
#include "ncdlab/nnet.hpp"

namespace ncdlab::harness {

struct PipelineOptions {
  // n_outputs and seed are overwritten per cell.
  nnet::NetConfig net;
  // k and seed are overwritten per cell.
  cluster::KMeansConfig kmeans{.k = 1, .restarts = 10, .max_iters = 300, .rel_tol = 1e-6};
  cluster::LabelMapMethod label_map = cluster::LabelMapMethod::majority;
  int samples_per_class_train = 200;
  int samples_per_class_test = 100;
  int n_bins = 10;
};

struct CellRequest {
  expdesign::ExperimentSpec tmpl;
  int n_known = 2;
  int n_unknown = 1;
  expdesign::SplitMode split_mode = expdesign::SplitMode::interpolation;
  std::uint64_t seed = 0;
};

// The template with the cell fields filled in.
expdesign::ExperimentSpec cell_spec(const CellRequest& cell, expdesign::Task task,
                                    const PipelineOptions& opts);

// False when the cell violates the class-bin budget or split geometry.
// Class split used by every run of this spec (bins, known/unknown ids).
expdesign::ClassSplit cell_split(const expdesign::ExperimentSpec& spec);
bool cell_feasible(const CellRequest& cell, const PipelineOptions& opts);

// split -> materialize -> train -> extract -> k-means -> label map -> evaluate.
// NCD clusters the unknown-class test samples with k = n_unknown; GCD clusters
// every test sample with k = n_known + n_unknown. Stage failures surface as
// StageError.
metrics::MetricsReport run_cell(const CellRequest& cell, expdesign::Task task,
                                const PipelineOptions& opts);

// Same as run_cell for several tasks, training the feature extractor once.
std::vector<std::pair<expdesign::Task, metrics::MetricsReport>> run_cell_tasks(
    const CellRequest& cell, std::span<const expdesign::Task> tasks, const PipelineOptions& opts);

metrics::RunKey run_key(const CellRequest& cell, expdesign::Task task);

struct HeatmapCell {
  double mean = 0.0;
  int count = 0;
  bool feasible = true;
};

// Rows are n_unknown values ascending, columns n_known values ascending.
struct HeatmapGrid {
  std::string experiment_id;
  std::string metric;
  expdesign::Task task = expdesign::Task::ncd;
  expdesign::SplitMode split_mode = expdesign::SplitMode::interpolation;
  std::vector<int> row_values;
  std::vector<int> col_values;
  std::vector<std::vector<HeatmapCell>> cells;  // [row][col]

  const HeatmapCell& at(int n_unknown, int n_known) const;
  int feasible_count() const;
  int infeasible_count() const;
};

inline constexpr const char* kMetricNames[] = {"accuracy", "precision_macro", "recall_macro"};

double metric_value(const metrics::MetricsRow& row, std::string_view metric);

struct MatrixRequest {
  expdesign::ExperimentSpec tmpl;
  std::vector<int> n_known_values;
  std::vector<int> n_unknown_values;
  std::vector<expdesign::SplitMode> modes;
  std::vector<expdesign::Task> tasks;
  std::vector<std::uint64_t> seeds;
  PipelineOptions options;
  int jobs = 1;
};

struct MatrixResult {
  std::vector<HeatmapGrid> grids;  // one per (metric, task, mode)
  std::vector<metrics::MetricsRow> rows;
};

// Runs every feasible cell; infeasible cells are marked in the grids. Rows are
// produced in a fixed order regardless of `jobs` and appended to `csv` (no header)
// when given.
MatrixResult run_matrix(const MatrixRequest& request, std::ostream* csv = nullptr);

// Heat maps of one experiment rebuilt from metrics rows. Cells without rows are
// marked infeasible.
std::vector<HeatmapGrid> grids_from_rows(std::span<const metrics::MetricsRow> rows,
                                         const std::string& experiment_id);

using Curve = std::vector<std::pair<int, double>>;

struct SaturationResult {
  Curve curve;
  double epsilon = 0.01;
  std::optional<int> saturation_n;
  bool found = false;
};

// Smallest n_known after which every marginal gain is below epsilon.
SaturationResult detect_saturation(Curve curve, double epsilon = 0.01);

struct CapacityPoint {
  std::vector<int> hidden_widths;
  std::size_t param_count = 0;
  double params_per_known_class = 0.0;
  double mean_accuracy = 0.0;
  std::vector<double> accuracies;  // per seed, in seed order
};

// NCD accuracy per width entry, averaged over seeds, sorted by params per class.
std::vector<CapacityPoint> capacity_sweep(const expdesign::ExperimentSpec& tmpl, int n_known,
                                          int n_unknown,
                                          const std::vector<std::vector<int>>& widths_menu,
                                          std::span<const std::uint64_t> seeds,
                                          const PipelineOptions& opts,
                                          expdesign::SplitMode mode =
                                              expdesign::SplitMode::interpolation,
                                          int jobs = 1);

// Runs fn(0..n-1) on up to `jobs` threads; rethrows the lowest-index failure.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace ncdlab::harness
