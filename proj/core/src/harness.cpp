#include "ncdlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#include "ncdlab/errors.hpp"
#include "ncdlab/rng.hpp"

namespace ncdlab::harness {

using expdesign::SplitMode;
using expdesign::Task;

namespace {

constexpr std::uint64_t kSplitSalt = 0x73706c6974ULL;
constexpr std::uint64_t kModelSalt = 0x6d6f64656cULL;
constexpr std::uint64_t kClusterSalt = 0x636c7573ULL;
constexpr std::uint64_t kLabelSalt = 0x6c61626cULL;

template <class F>
auto stage(const char* name, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace

expdesign::ClassSplit cell_split(const expdesign::ExperimentSpec& spec) {
  auto bins = expdesign::bin_classes(spec.class_value_count(), spec.n_bins);
  return expdesign::split_classes(bins, spec.n_known, spec.n_unknown, spec.split_mode,
                                  derive_seed(spec.seed, {kSplitSalt}));
}

expdesign::ExperimentSpec cell_spec(const CellRequest& cell, Task task, const PipelineOptions& opts) {
  auto spec = cell.tmpl;
  spec.n_known = cell.n_known;
  spec.n_unknown = cell.n_unknown;
  spec.split_mode = cell.split_mode;
  spec.task = task;
  spec.seed = cell.seed;
  spec.samples_per_class_train = opts.samples_per_class_train;
  spec.samples_per_class_test = opts.samples_per_class_test;
  spec.n_bins = opts.n_bins;
  return spec;
}

bool cell_feasible(const CellRequest& cell, const PipelineOptions& opts) {
  try {
    auto spec = cell_spec(cell, Task::ncd, opts);
    expdesign::validate(spec);
    auto split = cell_split(spec);
    return expdesign::split_is_valid(split, spec.split_mode);
  } catch (const InfeasibleError&) {
    return false;
  } catch (const ParameterError&) {
    return false;
  }
}

metrics::RunKey run_key(const CellRequest& cell, Task task) {
  metrics::RunKey k;
  k.experiment_id = cell.tmpl.id;
  k.group = cell.tmpl.group;
  k.class_factor = cell.tmpl.class_factor();
  k.dataset = cell.tmpl.dataset;
  k.task = task;
  k.split_mode = cell.split_mode;
  k.n_known = cell.n_known;
  k.n_unknown = cell.n_unknown;
  k.seed = cell.seed;
  return k;
}

std::vector<std::pair<Task, metrics::MetricsReport>> run_cell_tasks(const CellRequest& cell,
                                                                    std::span<const Task> tasks,
                                                                    const PipelineOptions& opts) {
  if (tasks.empty()) return {};
  const bool need_known_test = std::find(tasks.begin(), tasks.end(), Task::gcd) != tasks.end();
  auto spec = cell_spec(cell, need_known_test ? Task::gcd : Task::ncd, opts);

  auto split = stage("split", [&] {
    expdesign::validate(spec);
    return cell_split(spec);
  });
  auto data = stage("materialize", [&] { return expdesign::materialize(spec, split); });

  auto net_cfg = opts.net;
  net_cfg.n_outputs = cell.n_known;
  net_cfg.seed = derive_seed(cell.seed, {kModelSalt});
  auto model = stage("train", [&] { return nnet::train(nnet::init_model(net_cfg), data.train, net_cfg); });
  auto features = stage("extract", [&] { return nnet::extract_features(model, data.test); });

  std::vector<std::pair<Task, metrics::MetricsReport>> out;
  for (Task task : tasks) {
    FeatureMatrix pool;
    if (task == Task::gcd) {
      pool = features;
    } else {
      std::vector<Eigen::Index> rows;
      for (std::size_t i = 0; i < data.test.samples.size(); ++i)
        if (!data.test.samples[i].known) rows.push_back(static_cast<Eigen::Index>(i));
      pool.values.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
      for (std::size_t r = 0; r < rows.size(); ++r) {
        pool.values.row(static_cast<Eigen::Index>(r)) = features.values.row(rows[r]);
        pool.labels.push_back(features.labels[rows[r]]);
      }
    }

    auto km = opts.kmeans;
    km.k = task == Task::ncd ? cell.n_unknown : cell.n_known + cell.n_unknown;
    km.seed = derive_seed(cell.seed, {kClusterSalt, static_cast<std::uint64_t>(task)});
    auto assignment = stage("cluster", [&] { return cluster::kmeans(pool, km); });
    auto predicted = stage("label_map", [&] {
      auto map = opts.label_map == cluster::LabelMapMethod::majority
                     ? cluster::majority_label_map(
                           assignment, pool.labels,
                           derive_seed(cell.seed, {kLabelSalt, static_cast<std::uint64_t>(task)}))
                     : cluster::one_to_one_label_map(assignment, pool.labels);
      return cluster::predict_labels(assignment, map);
    });
    out.emplace_back(task, stage("evaluate", [&] { return metrics::evaluate(predicted, pool.labels); }));
  }
  return out;
}

metrics::MetricsReport run_cell(const CellRequest& cell, Task task, const PipelineOptions& opts) {
  Task tasks[] = {task};
  return run_cell_tasks(cell, tasks, opts).front().second;
}

const HeatmapCell& HeatmapGrid::at(int n_unknown, int n_known) const {
  auto r = std::find(row_values.begin(), row_values.end(), n_unknown);
  auto c = std::find(col_values.begin(), col_values.end(), n_known);
  if (r == row_values.end() || c == col_values.end())
    throw ParameterError("heat map has no cell for (" + std::to_string(n_unknown) + ", " +
                         std::to_string(n_known) + ")");
  return cells[r - row_values.begin()][c - col_values.begin()];
}

int HeatmapGrid::feasible_count() const {
  int n = 0;
  for (const auto& row : cells)
    for (const auto& c : row) n += c.feasible ? 1 : 0;
  return n;
}

int HeatmapGrid::infeasible_count() const {
  int n = 0;
  for (const auto& row : cells)
    for (const auto& c : row) n += c.feasible ? 0 : 1;
  return n;
}

double metric_value(const metrics::MetricsRow& row, std::string_view metric) {
  if (metric == "accuracy") return row.accuracy;
  if (metric == "precision_macro") return row.precision_macro;
  if (metric == "recall_macro") return row.recall_macro;
  throw ParameterError("unknown metric '" + std::string(metric) + "'");
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  auto body = [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(workers, n); ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) body(i);
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace {

std::vector<int> sorted_unique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

HeatmapGrid empty_grid(const std::string& id, const std::string& metric, Task task, SplitMode mode,
                       const std::vector<int>& rows, const std::vector<int>& cols) {
  HeatmapGrid g;
  g.experiment_id = id;
  g.metric = metric;
  g.task = task;
  g.split_mode = mode;
  g.row_values = rows;
  g.col_values = cols;
  g.cells.assign(rows.size(), std::vector<HeatmapCell>(cols.size()));
  return g;
}

// Fills means from rows matching (task, mode); cells with no rows are left
// to the caller's feasibility marking.
void fill_means(HeatmapGrid& g, std::span<const metrics::MetricsRow> rows) {
  std::vector<std::vector<double>> sums(g.row_values.size(),
                                        std::vector<double>(g.col_values.size(), 0.0));
  for (const auto& row : rows) {
    if (row.key.task != g.task || row.key.split_mode != g.split_mode) continue;
    auto r = std::find(g.row_values.begin(), g.row_values.end(), row.key.n_unknown);
    auto c = std::find(g.col_values.begin(), g.col_values.end(), row.key.n_known);
    if (r == g.row_values.end() || c == g.col_values.end()) continue;
    auto ri = r - g.row_values.begin();
    auto ci = c - g.col_values.begin();
    sums[ri][ci] += metric_value(row, g.metric);
    ++g.cells[ri][ci].count;
  }
  for (std::size_t r = 0; r < g.row_values.size(); ++r)
    for (std::size_t c = 0; c < g.col_values.size(); ++c)
      if (g.cells[r][c].count > 0) g.cells[r][c].mean = sums[r][c] / g.cells[r][c].count;
}

}  // namespace

MatrixResult run_matrix(const MatrixRequest& req, std::ostream* csv) {
  if (req.n_known_values.empty() || req.n_unknown_values.empty() || req.modes.empty() ||
      req.tasks.empty() || req.seeds.empty())
    throw ParameterError("run_matrix needs non-empty ranges, modes, tasks and seeds");

  const auto cols = sorted_unique(req.n_known_values);
  const auto rows_v = sorted_unique(req.n_unknown_values);

  struct Job {
    CellRequest cell;
    std::vector<std::pair<Task, metrics::MetricsReport>> reports;
  };
  std::vector<Job> jobs;
  std::set<std::tuple<SplitMode, int, int>> infeasible;
  for (auto mode : req.modes)
    for (int nu : rows_v)
      for (int nk : cols) {
        CellRequest probe{req.tmpl, nk, nu, mode, req.seeds.front()};
        if (!cell_feasible(probe, req.options)) {
          infeasible.insert({mode, nu, nk});
          continue;
        }
        for (auto seed : req.seeds) jobs.push_back({CellRequest{req.tmpl, nk, nu, mode, seed}, {}});
      }

  parallel_for(jobs.size(), req.jobs, [&](std::size_t i) {
    jobs[i].reports = run_cell_tasks(jobs[i].cell, req.tasks, req.options);
  });

  MatrixResult result;
  for (const auto& job : jobs)
    for (const auto& [task, report] : job.reports) {
      result.rows.push_back(metrics::make_row(run_key(job.cell, task), report));
      if (csv) metrics::write_metrics_row(*csv, result.rows.back());
    }

  for (const char* metric : kMetricNames)
    for (auto task : req.tasks)
      for (auto mode : req.modes) {
        auto g = empty_grid(req.tmpl.id, metric, task, mode, rows_v, cols);
        fill_means(g, result.rows);
        for (std::size_t r = 0; r < rows_v.size(); ++r)
          for (std::size_t c = 0; c < cols.size(); ++c)
            if (infeasible.contains({mode, rows_v[r], cols[c]})) g.cells[r][c].feasible = false;
        result.grids.push_back(std::move(g));
      }
  return result;
}

std::vector<HeatmapGrid> grids_from_rows(std::span<const metrics::MetricsRow> rows,
                                         const std::string& experiment_id) {
  std::vector<int> nk, nu;
  std::set<std::pair<Task, SplitMode>> combos;
  std::vector<metrics::MetricsRow> mine;
  for (const auto& r : rows) {
    if (r.key.experiment_id != experiment_id) continue;
    nk.push_back(r.key.n_known);
    nu.push_back(r.key.n_unknown);
    combos.insert({r.key.task, r.key.split_mode});
    mine.push_back(r);
  }
  nk = sorted_unique(nk);
  nu = sorted_unique(nu);
  std::vector<HeatmapGrid> out;
  for (const char* metric : kMetricNames)
    for (const auto& [task, mode] : combos) {
      auto g = empty_grid(experiment_id, metric, task, mode, nu, nk);
      fill_means(g, mine);
      for (auto& row : g.cells)
        for (auto& c : row) c.feasible = c.count > 0;
      out.push_back(std::move(g));
    }
  return out;
}

SaturationResult detect_saturation(Curve curve, double epsilon) {
  if (curve.size() < 3) throw ParameterError("saturation detection needs at least 3 points");
  if (!(epsilon > 0.0)) throw ParameterError("epsilon must be positive");
  for (std::size_t i = 1; i < curve.size(); ++i)
    if (curve[i].first <= curve[i - 1].first)
      throw ParameterError("curve must be sorted by strictly increasing n_known");

  SaturationResult r;
  r.curve = std::move(curve);
  r.epsilon = epsilon;
  // Walk back from the end while the gains stay below epsilon.
  std::size_t start = r.curve.size() - 1;
  while (start > 0 && r.curve[start].second - r.curve[start - 1].second < epsilon) --start;
  if (start < r.curve.size() - 1) {
    r.found = true;
    r.saturation_n = r.curve[start].first;
  }
  return r;
}

std::vector<CapacityPoint> capacity_sweep(const expdesign::ExperimentSpec& tmpl, int n_known,
                                          int n_unknown,
                                          const std::vector<std::vector<int>>& widths_menu,
                                          std::span<const std::uint64_t> seeds,
                                          const PipelineOptions& opts, SplitMode mode, int jobs) {
  if (seeds.empty()) throw ParameterError("capacity sweep needs at least one seed");
  auto grid = nnet::capacity_grid(widths_menu, n_known, opts.net);
  std::vector<CapacityPoint> points(grid.size());
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  for (std::size_t w = 0; w < grid.size(); ++w) {
    points[w].hidden_widths = grid[w].config.hidden_widths;
    points[w].param_count = grid[w].param_count;
    points[w].params_per_known_class = grid[w].params_per_known_class;
    points[w].accuracies.assign(seeds.size(), 0.0);
    for (std::size_t s = 0; s < seeds.size(); ++s) runs.emplace_back(w, s);
  }
  parallel_for(runs.size(), jobs, [&](std::size_t i) {
    auto [w, s] = runs[i];
    auto o = opts;
    o.net = grid[w].config;
    CellRequest cell{tmpl, n_known, n_unknown, mode, seeds[s]};
    points[w].accuracies[s] = run_cell(cell, Task::ncd, o).accuracy;
  });
  for (auto& p : points) {
    double sum = 0.0;
    for (double a : p.accuracies) sum += a;
    p.mean_accuracy = sum / static_cast<double>(p.accuracies.size());
  }
  std::stable_sort(points.begin(), points.end(), [](const auto& a, const auto& b) {
    return a.params_per_known_class < b.params_per_known_class;
  });
  return points;
}

}  // namespace ncdlab::harness
