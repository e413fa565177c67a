#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ncdlab/expdesign.hpp"

namespace ncdlab::metrics {

struct ClassMetrics {
  int label = 0;
  double precision = 0.0;  // 0 when the class is never predicted
  double recall = 0.0;
  int support = 0;          // true instances
  int predicted_count = 0;  // predicted instances
};

struct MetricsReport {
  double accuracy = 0.0;
  double precision_macro = 0.0;
  double recall_macro = 0.0;
  std::vector<ClassMetrics> per_class;  // one entry per true class, ascending label
  int n_samples = 0;
};

// Accuracy plus macro precision/recall averaged over the true classes.
MetricsReport evaluate(std::span<const int> predicted, std::span<const int> truth);

struct RunKey {
  std::string experiment_id;
  expdesign::Group group = expdesign::Group::A;
  std::string class_factor;
  expdesign::Dataset dataset = expdesign::Dataset::dsprites;
  expdesign::Task task = expdesign::Task::ncd;
  expdesign::SplitMode split_mode = expdesign::SplitMode::interpolation;
  int n_known = 0;
  int n_unknown = 0;
  std::uint64_t seed = 0;
};

// One metrics CSV row.
struct MetricsRow {
  RunKey key;
  double accuracy = 0.0;
  double precision_macro = 0.0;
  double recall_macro = 0.0;
};

MetricsRow make_row(const RunKey& key, const MetricsReport& report);

struct AggregatePoint {
  expdesign::Group group = expdesign::Group::A;
  expdesign::Task task = expdesign::Task::ncd;
  expdesign::SplitMode split_mode = expdesign::SplitMode::interpolation;
  int n_known = 0;
  std::optional<int> n_unknown;  // empty: pooled over every n_unknown
  double mean_accuracy = 0.0;
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  int count = 0;
};

// Means over configurations and seeds per (group, task, split_mode, n_known),
// both pooled and per n_unknown slice. Output is ordered by those keys, pooled
// entry first.
std::vector<AggregatePoint> aggregate_group(std::span<const MetricsRow> rows);

// Header: experiment_id,group,class_factor,dataset,task,split_mode,n_known,
// n_unknown,seed,accuracy,precision_macro,recall_macro
void write_metrics_header(std::ostream& out);
void write_metrics_row(std::ostream& out, const MetricsRow& row);
void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows);
std::vector<MetricsRow> read_metrics_csv(std::istream& in);

}  // namespace ncdlab::metrics
