#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ncdlab/expdesign.hpp"
#include "ncdlab/harness.hpp"

namespace ncdlab {

struct CapacityConfig {
  std::vector<std::string> template_ids{"A-orientation", "A-x_pos", "A-y_pos"};
  int n_known = 4;
  int n_unknown = 2;
  std::vector<std::vector<int>> widths_menu{{4}, {16}, {64}, {256}};
  expdesign::SplitMode split_mode = expdesign::SplitMode::interpolation;
};

// Experiment configuration read from JSON. Every key is optional; unknown keys
// are rejected.
struct RunConfig {
  std::vector<expdesign::Group> groups{expdesign::Group::A};
  std::vector<std::string> template_ids;  // overrides `groups` when non-empty
  std::string class_factor;               // empty: any
  std::vector<int> n_known{2, 3, 4, 5, 6, 7, 8};
  std::vector<int> n_unknown{1, 2, 3, 4};
  std::vector<expdesign::SplitMode> modes{expdesign::SplitMode::interpolation,
                                          expdesign::SplitMode::extrapolation};
  std::vector<expdesign::Task> tasks{expdesign::Task::ncd, expdesign::Task::gcd};
  std::vector<std::uint64_t> seeds{0, 1, 2};
  harness::PipelineOptions pipeline;
  CapacityConfig capacity;

  // Templates selected by groups / template_ids / class_factor, in table order.
  std::vector<expdesign::ExperimentSpec> templates() const;
};

RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const std::filesystem::path& path);

// Canonical JSON echo of a configuration (parseable by parse_run_config).
std::string to_json(const RunConfig& cfg);

// "2..8" or "2,3,5" style integer lists, as used on the command line.
std::vector<int> parse_int_list(std::string_view text);

}  // namespace ncdlab
