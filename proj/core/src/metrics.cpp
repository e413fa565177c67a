#include "ncdlab/metrics.hpp"

#include <fmt/format.h>

#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include "ncdlab/errors.hpp"

namespace ncdlab::metrics {

MetricsReport evaluate(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size())
    throw ParameterError("predicted and true labels differ in length");
  if (truth.empty()) throw ParameterError("cannot evaluate an empty label sequence");

  std::map<int, int> support;
  std::map<int, int> predicted_count;
  std::map<int, int> true_positive;
  int correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++support[truth[i]];
    ++predicted_count[predicted[i]];
    if (predicted[i] == truth[i]) {
      ++correct;
      ++true_positive[truth[i]];
    }
  }

  MetricsReport r;
  r.n_samples = static_cast<int>(truth.size());
  r.accuracy = static_cast<double>(correct) / r.n_samples;
  double precision_sum = 0.0;
  double recall_sum = 0.0;
  for (const auto& [label, n] : support) {
    ClassMetrics c;
    c.label = label;
    c.support = n;
    auto tp = true_positive.contains(label) ? true_positive.at(label) : 0;
    c.predicted_count = predicted_count.contains(label) ? predicted_count.at(label) : 0;
    c.recall = static_cast<double>(tp) / n;
    c.precision = c.predicted_count > 0 ? static_cast<double>(tp) / c.predicted_count : 0.0;
    precision_sum += c.precision;
    recall_sum += c.recall;
    r.per_class.push_back(c);
  }
  r.precision_macro = precision_sum / static_cast<double>(support.size());
  r.recall_macro = recall_sum / static_cast<double>(support.size());
  return r;
}

MetricsRow make_row(const RunKey& key, const MetricsReport& report) {
  return {key, report.accuracy, report.precision_macro, report.recall_macro};
}

std::vector<AggregatePoint> aggregate_group(std::span<const MetricsRow> rows) {
  // n_unknown = -1 marks the pooled entry so it sorts first.
  using Key = std::tuple<expdesign::Group, expdesign::Task, expdesign::SplitMode, int, int>;
  struct Sum {
    double acc = 0.0, prec = 0.0, rec = 0.0;
    int count = 0;
  };
  std::map<Key, Sum> sums;
  for (const auto& row : rows) {
    for (int nu : {-1, row.key.n_unknown}) {
      auto& s = sums[{row.key.group, row.key.task, row.key.split_mode, row.key.n_known, nu}];
      s.acc += row.accuracy;
      s.prec += row.precision_macro;
      s.rec += row.recall_macro;
      ++s.count;
    }
  }
  std::vector<AggregatePoint> out;
  for (const auto& [key, s] : sums) {
    AggregatePoint p;
    std::tie(p.group, p.task, p.split_mode, p.n_known, std::ignore) = key;
    int nu = std::get<4>(key);
    if (nu >= 0) p.n_unknown = nu;
    p.mean_accuracy = s.acc / s.count;
    p.mean_precision = s.prec / s.count;
    p.mean_recall = s.rec / s.count;
    p.count = s.count;
    out.push_back(p);
  }
  return out;
}

void write_metrics_header(std::ostream& out) {
  out << "experiment_id,group,class_factor,dataset,task,split_mode,n_known,n_unknown,seed,"
         "accuracy,precision_macro,recall_macro\n";
}

void write_metrics_row(std::ostream& out, const MetricsRow& row) {
  const auto& k = row.key;
  out << fmt::format("{},{},{},{},{},{},{},{},{},{:.10f},{:.10f},{:.10f}\n", k.experiment_id,
                     expdesign::to_string(k.group), k.class_factor, expdesign::to_string(k.dataset),
                     expdesign::to_string(k.task), expdesign::to_string(k.split_mode), k.n_known,
                     k.n_unknown, k.seed, row.accuracy, row.precision_macro, row.recall_macro);
}

void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows) {
  write_metrics_header(out);
  for (const auto& r : rows) write_metrics_row(out, r);
}

std::vector<MetricsRow> read_metrics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("metrics CSV is empty");
  std::vector<MetricsRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 12)
      throw IoError("metrics CSV line " + std::to_string(line_no) + ": expected 12 columns");
    try {
      MetricsRow r;
      r.key.experiment_id = cells[0];
      r.key.group = expdesign::parse_group(cells[1]);
      r.key.class_factor = cells[2];
      r.key.dataset = cells[3] == "squircle" ? expdesign::Dataset::squircle
                                             : expdesign::Dataset::dsprites;
      r.key.task = expdesign::parse_task(cells[4]);
      r.key.split_mode = expdesign::parse_split_mode(cells[5]);
      r.key.n_known = std::stoi(cells[6]);
      r.key.n_unknown = std::stoi(cells[7]);
      r.key.seed = std::stoull(cells[8]);
      r.accuracy = std::stod(cells[9]);
      r.precision_macro = std::stod(cells[10]);
      r.recall_macro = std::stod(cells[11]);
      rows.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw IoError("metrics CSV line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rows;
}

}  // namespace ncdlab::metrics
