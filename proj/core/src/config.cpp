#include "ncdlab/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "ncdlab/errors.hpp"

namespace ncdlab {

namespace {

using nlohmann::json;
using expdesign::SplitMode;
using expdesign::Task;

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items())
    if (!ok.contains(key))
      throw ParameterError(std::string("unknown key '") + key + "' in " + where);
}

std::vector<int> int_list(const json& j) {
  if (j.is_string()) return parse_int_list(j.get<std::string>());
  if (j.is_number_integer()) return {j.get<int>()};
  return j.get<std::vector<int>>();
}

std::vector<SplitMode> modes_from(const std::string& s) {
  if (s == "both") return {SplitMode::interpolation, SplitMode::extrapolation};
  return {expdesign::parse_split_mode(s)};
}

std::vector<Task> tasks_from(const std::string& s) {
  if (s == "both") return {Task::ncd, Task::gcd};
  return {expdesign::parse_task(s)};
}

}  // namespace

std::vector<int> parse_int_list(std::string_view text) {
  std::string s(text);
  std::vector<int> out;
  try {
    auto dots = s.find("..");
    if (dots != std::string::npos) {
      int lo = std::stoi(s.substr(0, dots));
      int hi = std::stoi(s.substr(dots + 2));
      if (hi < lo) throw ParameterError("empty range '" + s + "'");
      for (int v = lo; v <= hi; ++v) out.push_back(v);
      return out;
    }
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  } catch (const std::logic_error&) {
    throw ParameterError("cannot parse integer list '" + s + "'");
  }
  if (out.empty()) throw ParameterError("empty integer list");
  return out;
}

std::vector<expdesign::ExperimentSpec> RunConfig::templates() const {
  std::vector<expdesign::ExperimentSpec> out;
  if (!template_ids.empty()) {
    for (const auto& id : template_ids) out.push_back(expdesign::find_template(id));
  } else {
    for (auto g : groups)
      for (auto& t : expdesign::enumerate_experiments(g)) out.push_back(std::move(t));
  }
  if (!class_factor.empty())
    std::erase_if(out, [&](const auto& t) { return t.class_factor() != class_factor; });
  return out;
}

RunConfig parse_run_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParameterError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParameterError("config must be a JSON object");
  reject_unknown(j,
                 {"group", "groups", "templates", "class_factor", "n_known", "n_unknown",
                  "split_mode", "task", "seeds", "samples_per_class_train",
                  "samples_per_class_test", "n_bins", "net", "kmeans", "label_map", "capacity"},
                 "config");

  RunConfig c;
  try {
    if (j.contains("group")) c.groups = {expdesign::parse_group(j["group"].get<std::string>())};
    if (j.contains("groups")) {
      c.groups.clear();
      for (const auto& g : j["groups"]) c.groups.push_back(expdesign::parse_group(g.get<std::string>()));
    }
    if (j.contains("templates")) c.template_ids = j["templates"].get<std::vector<std::string>>();
    if (j.contains("class_factor")) c.class_factor = j["class_factor"].get<std::string>();
    if (j.contains("n_known")) c.n_known = int_list(j["n_known"]);
    if (j.contains("n_unknown")) c.n_unknown = int_list(j["n_unknown"]);
    if (j.contains("split_mode")) c.modes = modes_from(j["split_mode"].get<std::string>());
    if (j.contains("task")) c.tasks = tasks_from(j["task"].get<std::string>());
    if (j.contains("seeds")) {
      const auto& s = j["seeds"];
      if (s.is_object()) {
        reject_unknown(s, {"base", "count"}, "seeds");
        auto base = s.value("base", std::uint64_t{0});
        auto count = s.value("count", 3);
        c.seeds.clear();
        for (int i = 0; i < count; ++i) c.seeds.push_back(base + static_cast<std::uint64_t>(i));
      } else {
        c.seeds = s.get<std::vector<std::uint64_t>>();
      }
    }
    auto& p = c.pipeline;
    p.samples_per_class_train = j.value("samples_per_class_train", p.samples_per_class_train);
    p.samples_per_class_test = j.value("samples_per_class_test", p.samples_per_class_test);
    p.n_bins = j.value("n_bins", p.n_bins);
    if (j.contains("net")) {
      const auto& n = j["net"];
      reject_unknown(n, {"hidden_widths", "learning_rate", "batch_size", "max_epochs",
                         "target_train_accuracy"},
                     "net");
      p.net.hidden_widths = n.value("hidden_widths", p.net.hidden_widths);
      p.net.learning_rate = n.value("learning_rate", p.net.learning_rate);
      p.net.batch_size = n.value("batch_size", p.net.batch_size);
      p.net.max_epochs = n.value("max_epochs", p.net.max_epochs);
      p.net.target_train_accuracy = n.value("target_train_accuracy", p.net.target_train_accuracy);
    }
    if (j.contains("kmeans")) {
      const auto& k = j["kmeans"];
      reject_unknown(k, {"restarts", "max_iters", "rel_tol", "normalize"}, "kmeans");
      p.kmeans.restarts = k.value("restarts", p.kmeans.restarts);
      p.kmeans.max_iters = k.value("max_iters", p.kmeans.max_iters);
      p.kmeans.rel_tol = k.value("rel_tol", p.kmeans.rel_tol);
      p.kmeans.normalize = k.value("normalize", p.kmeans.normalize);
    }
    if (j.contains("label_map")) {
      auto m = j["label_map"].get<std::string>();
      if (m == "majority")
        p.label_map = cluster::LabelMapMethod::majority;
      else if (m == "one_to_one")
        p.label_map = cluster::LabelMapMethod::one_to_one;
      else
        throw ParameterError("label_map must be 'majority' or 'one_to_one'");
    }
    if (j.contains("capacity")) {
      const auto& k = j["capacity"];
      reject_unknown(k, {"templates", "n_known", "n_unknown", "widths_menu", "split_mode"},
                     "capacity");
      c.capacity.template_ids = k.value("templates", c.capacity.template_ids);
      c.capacity.n_known = k.value("n_known", c.capacity.n_known);
      c.capacity.n_unknown = k.value("n_unknown", c.capacity.n_unknown);
      c.capacity.widths_menu = k.value("widths_menu", c.capacity.widths_menu);
      if (k.contains("split_mode"))
        c.capacity.split_mode = expdesign::parse_split_mode(k["split_mode"].get<std::string>());
    }
  } catch (const json::exception& e) {
    throw ParameterError(std::string("bad config value: ") + e.what());
  }

  if (c.groups.empty()) throw ParameterError("config selects no experiment group");
  if (c.seeds.empty()) throw ParameterError("config needs at least one seed");
  c.pipeline.net.n_outputs = 2;
  c.pipeline.net.validate();
  for (const auto& id : c.template_ids) (void)expdesign::find_template(id);
  for (const auto& id : c.capacity.template_ids) (void)expdesign::find_template(id);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_run_config(ss.str());
}

std::string to_json(const RunConfig& c) {
  json j;
  j["groups"] = json::array();
  for (auto g : c.groups) j["groups"].push_back(std::string(expdesign::to_string(g)));
  j["templates"] = c.template_ids;
  j["class_factor"] = c.class_factor;
  j["n_known"] = c.n_known;
  j["n_unknown"] = c.n_unknown;
  j["split_mode"] = c.modes.size() == 2 ? "both" : std::string(expdesign::to_string(c.modes.front()));
  j["task"] = c.tasks.size() == 2 ? "both" : std::string(expdesign::to_string(c.tasks.front()));
  j["seeds"] = c.seeds;
  const auto& p = c.pipeline;
  j["samples_per_class_train"] = p.samples_per_class_train;
  j["samples_per_class_test"] = p.samples_per_class_test;
  j["n_bins"] = p.n_bins;
  j["net"] = {{"hidden_widths", p.net.hidden_widths},
              {"learning_rate", p.net.learning_rate},
              {"batch_size", p.net.batch_size},
              {"max_epochs", p.net.max_epochs},
              {"target_train_accuracy", p.net.target_train_accuracy}};
  j["kmeans"] = {{"restarts", p.kmeans.restarts},
                 {"max_iters", p.kmeans.max_iters},
                 {"rel_tol", p.kmeans.rel_tol},
                 {"normalize", p.kmeans.normalize}};
  j["label_map"] = p.label_map == cluster::LabelMapMethod::majority ? "majority" : "one_to_one";
  j["capacity"] = {{"templates", c.capacity.template_ids},
                   {"n_known", c.capacity.n_known},
                   {"n_unknown", c.capacity.n_unknown},
                   {"widths_menu", c.capacity.widths_menu},
                   {"split_mode", std::string(expdesign::to_string(c.capacity.split_mode))}};
  return j.dump(2) + "\n";
}

}  // namespace ncdlab
