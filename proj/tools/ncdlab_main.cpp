#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ncdlab/config.hpp"
#include "ncdlab/errors.hpp"
#include "ncdlab/expdesign.hpp"
#include "ncdlab/harness.hpp"
#include "ncdlab/metrics.hpp"
#include "ncdlab/shapegen.hpp"
#include "ncdlab/svg.hpp"

namespace fs = std::filesystem;
using namespace ncdlab;
using expdesign::SplitMode;
using expdesign::Task;

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::string group;
  std::string task;
  std::string mode;
  std::vector<std::string> templates;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "output directory")->required();
  cmd->add_option("--seed", f.seed, "base seed (replaces the configured seed list, same count)");
  cmd->add_option("--jobs", f.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--group", f.group, "experiment group")->check(CLI::IsMember({"A", "B", "C"}));
  cmd->add_option("--task", f.task, "ncd, gcd or both")->check(CLI::IsMember({"ncd", "gcd", "both"}));
  cmd->add_option("--mode", f.mode, "interp, extrap or both")
      ->check(CLI::IsMember({"interp", "extrap", "both"}));
  cmd->add_option("--template", f.templates, "restrict to template id(s), e.g. A-x_pos");
}

RunConfig resolve(const CommonFlags& f) {
  RunConfig cfg = f.config.empty() ? parse_run_config("{}") : load_run_config(f.config);
  if (!f.group.empty()) {
    cfg.groups = {expdesign::parse_group(f.group)};
    cfg.template_ids.clear();
  }
  if (!f.templates.empty()) cfg.template_ids = f.templates;
  if (f.task == "both")
    cfg.tasks = {Task::ncd, Task::gcd};
  else if (!f.task.empty())
    cfg.tasks = {expdesign::parse_task(f.task)};
  if (f.mode == "both")
    cfg.modes = {SplitMode::interpolation, SplitMode::extrapolation};
  else if (!f.mode.empty())
    cfg.modes = {expdesign::parse_split_mode(f.mode)};
  if (f.seed) {
    const std::size_t n = cfg.seeds.size();
    cfg.seeds.clear();
    for (std::size_t i = 0; i < n; ++i) cfg.seeds.push_back(*f.seed + i);
  }
  return cfg;
}

std::ofstream open_out(const fs::path& p) {
  fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw IoError("cannot open " + p.string() + " for writing");
  return f;
}

std::string grid_filename(const harness::HeatmapGrid& g) {
  return g.experiment_id + "_" + g.metric + "_" + std::string(expdesign::to_string(g.task)) + "_" +
         std::string(expdesign::to_string(g.split_mode)) + ".svg";
}

int cmd_gen(const CommonFlags& f, int n_known, int n_unknown, bool images) {
  const RunConfig cfg = resolve(f);
  const fs::path out(f.out);
  const std::uint64_t seed = cfg.seeds.front();
  int written = 0;
  for (const auto& tmpl : cfg.templates())
    for (SplitMode mode : cfg.modes)
      for (Task task : cfg.tasks) {
        harness::CellRequest cell{tmpl, n_known, n_unknown, mode, seed};
        if (!harness::cell_feasible(cell, cfg.pipeline)) {
          std::cerr << "skip " << tmpl.id << " " << expdesign::to_string(mode)
                    << ": infeasible for n_known=" << n_known << " n_unknown=" << n_unknown << "\n";
          continue;
        }
        const auto spec = harness::cell_spec(cell, task, cfg.pipeline);
        const auto split = harness::cell_split(spec);
        const auto data = expdesign::materialize(spec, split);
        const fs::path dir = out / tmpl.id /
                             (std::string(expdesign::to_string(mode)) + "_" +
                              std::string(expdesign::to_string(task)));
        auto sm = open_out(dir / "split_manifest.csv");
        expdesign::write_split_manifest_csv(sm, split);
        for (const auto& [name, set] : {std::pair{"train", &data.train}, std::pair{"test", &data.test}}) {
          auto m = open_out(dir / (std::string(name) + "_manifest.csv"));
          expdesign::write_manifest_csv(m, *set, name);
          if (!images) continue;
          fs::create_directories(dir / name);
          for (std::size_t i = 0; i < set->samples.size(); ++i) {
            const auto& s = set->samples[i];
            shapegen::write_pgm(s.image, dir / name /
                                             expdesign::sample_filename(spec.dataset, s.factors,
                                                                        name + std::to_string(i)));
          }
        }
        std::cout << dir.string() << ": " << data.train.samples.size() << " train, "
                  << data.test.samples.size() << " test\n";
        ++written;
      }
  return written > 0 ? 0 : 1;
}

int cmd_run(const CommonFlags& f) {
  const RunConfig cfg = resolve(f);
  const fs::path out(f.out);
  {
    auto j = open_out(out / "config_resolved.json");
    j << to_json(cfg) << '\n';
  }
  auto csv = open_out(out / "metrics.csv");
  metrics::write_metrics_header(csv);
  for (const auto& tmpl : cfg.templates()) {
    harness::MatrixRequest req{tmpl,      cfg.n_known, cfg.n_unknown, cfg.modes,
                               cfg.tasks, cfg.seeds,   cfg.pipeline,  f.jobs};
    const auto res = harness::run_matrix(req, &csv);
    csv.flush();
    for (const auto& g : res.grids) harness::emit_heatmap_svg(g, out / "heatmaps" / grid_filename(g));
    const auto& acc = res.grids.front();
    std::cout << tmpl.id << ": " << res.rows.size() << " runs, " << acc.infeasible_count()
              << " infeasible cells per grid\n";
  }
  return 0;
}

int cmd_capacity(const CommonFlags& f) {
  const RunConfig cfg = resolve(f);
  const fs::path out(f.out);
  const auto& cap = cfg.capacity;
  auto csv = open_out(out / "capacity.csv");
  csv << "template,hidden_widths,param_count,params_per_known_class,seed,accuracy\n";
  harness::CurvePlot plot{"capacity sweep (n_known=" + std::to_string(cap.n_known) +
                              ", n_unknown=" + std::to_string(cap.n_unknown) + ")",
                          "parameters per known class", "NCD accuracy", true, {}};
  for (const auto& id : cap.template_ids) {
    const auto pts = harness::capacity_sweep(expdesign::find_template(id), cap.n_known, cap.n_unknown,
                                             cap.widths_menu, cfg.seeds, cfg.pipeline,
                                             cap.split_mode, f.jobs);
    harness::CurveSeries series{id, {}};
    for (const auto& p : pts) {
      std::string widths;
      for (std::size_t i = 0; i < p.hidden_widths.size(); ++i)
        widths += (i ? "x" : "") + std::to_string(p.hidden_widths[i]);
      for (std::size_t s = 0; s < p.accuracies.size(); ++s) {
        char line[256];
        std::snprintf(line, sizeof line, "%s,%s,%zu,%.4f,%llu,%.10f\n", id.c_str(), widths.c_str(),
                      p.param_count, p.params_per_known_class,
                      static_cast<unsigned long long>(cfg.seeds[s]), p.accuracies[s]);
        csv << line;
      }
      series.points.push_back({p.params_per_known_class, p.mean_accuracy});
      std::printf("%-14s %-10s params/class %12.1f  mean acc %.4f\n", id.c_str(), widths.c_str(),
                  p.params_per_known_class, p.mean_accuracy);
    }
    plot.series.push_back(std::move(series));
  }
  harness::emit_curve_svg(plot, out / "capacity.svg");
  return 0;
}

std::vector<metrics::MetricsRow> read_rows(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return metrics::read_metrics_csv(in);
}

int cmd_analyze(const CommonFlags& f, const std::string& input, double epsilon) {
  const auto rows = read_rows(input);
  const fs::path out(f.out);
  const auto points = metrics::aggregate_group(rows);

  auto agg = open_out(out / "aggregate.csv");
  agg << "group,task,split_mode,n_unknown,n_known,mean_accuracy,mean_precision,mean_recall,count\n";
  for (const auto& p : points) {
    char line[256];
    std::snprintf(line, sizeof line, "%s,%s,%s,%s,%d,%.10f,%.10f,%.10f,%d\n",
                  std::string(expdesign::to_string(p.group)).c_str(),
                  std::string(expdesign::to_string(p.task)).c_str(),
                  std::string(expdesign::to_string(p.split_mode)).c_str(),
                  p.n_unknown ? std::to_string(*p.n_unknown).c_str() : "all", p.n_known,
                  p.mean_accuracy, p.mean_precision, p.mean_recall, p.count);
    agg << line;
  }

  // one curve per (group, task, mode, n_unknown or pooled)
  std::map<std::string, harness::Curve> curves;
  for (const auto& p : points) {
    const std::string key = std::string(expdesign::to_string(p.group)) + "," +
                            std::string(expdesign::to_string(p.task)) + "," +
                            std::string(expdesign::to_string(p.split_mode)) + "," +
                            (p.n_unknown ? std::to_string(*p.n_unknown) : "all");
    curves[key].push_back({p.n_known, p.mean_accuracy});
  }
  auto sat_csv = open_out(out / "saturation.csv");
  auto sat_txt = open_out(out / "saturation.txt");
  sat_csv << "group,task,split_mode,n_unknown,epsilon,found,saturation_n_known\n";
  for (auto& [key, curve] : curves) {
    std::sort(curve.begin(), curve.end());
    if (curve.size() < 3) {
      sat_txt << key << ": fewer than 3 n_known values, skipped\n";
      continue;
    }
    const auto r = harness::detect_saturation(curve, epsilon);
    sat_csv << key << ',' << epsilon << ',' << (r.found ? "true" : "false") << ','
            << (r.saturation_n ? std::to_string(*r.saturation_n) : "") << '\n';
    sat_txt << key << ": "
            << (r.found ? "plateau from n_known=" + std::to_string(*r.saturation_n) : "no plateau")
            << " (epsilon " << epsilon << ");";
    for (const auto& [n, v] : curve) {
      char buf[32];
      std::snprintf(buf, sizeof buf, " %d:%.3f", n, v);
      sat_txt << buf;
    }
    sat_txt << '\n';
  }
  std::cout << "aggregated " << rows.size() << " rows into " << points.size() << " points, "
            << curves.size() << " curves\n";
  return 0;
}

int cmd_plot(const CommonFlags& f, const std::string& input) {
  const auto rows = read_rows(input);
  const fs::path out(f.out);
  std::set<std::string> ids;
  for (const auto& r : rows) ids.insert(r.key.experiment_id);
  int files = 0;
  for (const auto& id : ids)
    for (const auto& g : harness::grids_from_rows(rows, id)) {
      harness::emit_heatmap_svg(g, out / "heatmaps" / grid_filename(g));
      ++files;
    }
  // pooled accuracy curves per group, one plot per (task, mode)
  std::map<std::string, harness::CurvePlot> plots;
  for (const auto& p : metrics::aggregate_group(rows)) {
    if (p.n_unknown) continue;
    const std::string key = std::string(expdesign::to_string(p.task)) + "_" +
                            std::string(expdesign::to_string(p.split_mode));
    auto& plot = plots[key];
    plot.title = "mean accuracy, " + key;
    plot.x_label = "# known classes";
    plot.y_label = "accuracy";
    const std::string name = "group " + std::string(expdesign::to_string(p.group));
    auto it = std::find_if(plot.series.begin(), plot.series.end(),
                           [&](const auto& s) { return s.name == name; });
    if (it == plot.series.end()) {
      plot.series.push_back({name, {}});
      it = plot.series.end() - 1;
    }
    it->points.push_back({static_cast<double>(p.n_known), p.mean_accuracy});
  }
  for (const auto& [key, plot] : plots) {
    harness::emit_curve_svg(plot, out / ("curve_" + key + ".svg"));
    ++files;
  }
  std::cout << "wrote " << files << " SVG files\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ncdlab: class discovery experiments on synthetic shapes"};
  app.require_subcommand(1);

  CommonFlags gen_f, run_f, cap_f, ana_f, plot_f;
  int gen_known = 4, gen_unknown = 2;
  bool gen_no_images = false;
  auto* gen = app.add_subcommand("gen", "render a split's datasets and manifests");
  add_common(gen, gen_f);
  gen->add_option("--n-known", gen_known, "known classes")->check(CLI::PositiveNumber);
  gen->add_option("--n-unknown", gen_unknown, "unknown classes")->check(CLI::PositiveNumber);
  gen->add_flag("--no-images", gen_no_images, "write manifests only");

  auto* run = app.add_subcommand("run", "run the experiment matrix");
  add_common(run, run_f);

  auto* cap = app.add_subcommand("capacity", "sweep network width at a fixed class split");
  add_common(cap, cap_f);

  std::string ana_in, plot_in;
  double epsilon = 0.01;
  auto* ana = app.add_subcommand("analyze", "aggregate curves and detect saturation from a metrics CSV");
  add_common(ana, ana_f);
  ana->add_option("--input", ana_in, "metrics CSV")->required()->check(CLI::ExistingFile);
  ana->add_option("--epsilon", epsilon, "saturation threshold")->check(CLI::PositiveNumber);

  auto* plot = app.add_subcommand("plot", "render heat maps and curves from a metrics CSV");
  add_common(plot, plot_f);
  plot->add_option("--input", plot_in, "metrics CSV")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_gen(gen_f, gen_known, gen_unknown, !gen_no_images);
    if (*run) return cmd_run(run_f);
    if (*cap) return cmd_capacity(cap_f);
    if (*ana) return cmd_analyze(ana_f, ana_in, epsilon);
    if (*plot) return cmd_plot(plot_f, plot_in);
  } catch (const StageError& e) {
    std::cerr << "error in stage " << e.stage() << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
