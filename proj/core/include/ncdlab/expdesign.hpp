#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ncdlab/shapegen.hpp"

namespace ncdlab::expdesign {

enum class Group { A, B, C };
enum class Dataset { dsprites, squircle };
enum class Role { class_defining, fixed, variable };
enum class SplitMode { interpolation, extrapolation };
enum class Task { ncd, gcd };

std::string_view to_string(Group g);
std::string_view to_string(Dataset d);
std::string_view to_string(Role r);
std::string_view to_string(SplitMode m);
std::string_view to_string(Task t);

Group parse_group(std::string_view s);
SplitMode parse_split_mode(std::string_view s);
Task parse_task(std::string_view s);

struct FactorSpec {
  std::string name;
  int value_count = 0;
  std::string semantics;
};

// Factor schema of a dataset, in canonical order.
const std::vector<FactorSpec>& factor_schema(Dataset d);
int factor_index(Dataset d, std::string_view name);

struct FactorRole {
  std::string factor_name;
  Role role = Role::variable;
  std::optional<int> fixed_value;  // set iff role == fixed
};

struct ExperimentSpec {
  std::string id;
  Group group = Group::A;
  Dataset dataset = Dataset::dsprites;
  std::vector<FactorRole> roles;  // one entry per schema factor, schema order
  int n_known = 2;
  int n_unknown = 1;
  SplitMode split_mode = SplitMode::interpolation;
  Task task = Task::ncd;
  int samples_per_class_train = 200;
  int samples_per_class_test = 100;
  int n_bins = 10;
  std::uint64_t seed = 0;

  const FactorRole& class_role() const;
  const std::string& class_factor() const { return class_role().factor_name; }
  int class_value_count() const;
};

// Throws ParameterError/InfeasibleError describing the first violated invariant.
void validate(const ExperimentSpec& spec);

// Table of experiment templates for a group: 3 for A, 6 for B, 3 for C.
// Cell-specific fields (n_known, n_unknown, split_mode, task, seed) hold defaults.
std::vector<ExperimentSpec> enumerate_experiments(Group group);

// Looks a template up by id across all groups.
ExperimentSpec find_template(std::string_view id);

// Inclusive range of factor values making up one class.
struct ValueInterval {
  int low = 0;
  int high = 0;

  int width() const { return high - low + 1; }
  bool contains(int v) const { return v >= low && v <= high; }
  bool operator==(const ValueInterval&) const = default;
};

// Contiguous, exhaustive bins in value order; sizes differ by at most one,
// with the larger bins first.
std::vector<ValueInterval> bin_classes(int factor_value_count, int n_classes);

struct ClassSplit {
  std::vector<ValueInterval> class_bins;
  std::vector<int> known_ids;    // ascending
  std::vector<int> unknown_ids;  // ascending
};

ClassSplit split_classes(const std::vector<ValueInterval>& bins, int n_known, int n_unknown,
                         SplitMode mode, std::uint64_t seed);

// Checks disjointness and the interpolation / extrapolation geometry.
bool split_is_valid(const ClassSplit& split, SplitMode mode);

struct Sample {
  shapegen::BinaryImage image;
  std::vector<int> factors;  // schema order
  int label = 0;             // class id == bin index
  bool known = false;
};

struct LabeledDataset {
  Dataset dataset = Dataset::dsprites;
  std::vector<Sample> samples;

  std::map<int, int> class_counts() const;
  bool balanced() const;
  std::vector<int> labels() const;
};

struct MaterializedSplit {
  LabeledDataset train;
  LabeledDataset test;
};

// Train holds only known classes; test holds unknown classes (NCD) or
// known and unknown (GCD). Samples of a class depend only on (seed, class id),
// so the NCD test set is a subset of the GCD one for the same seed.
MaterializedSplit materialize(const ExperimentSpec& spec, const ClassSplit& split);

shapegen::BinaryImage render_sample(Dataset d, const std::vector<int>& factors);

// CSV: sample_id, dataset, <factor names...>, class_label
void write_manifest_csv(std::ostream& out, const LabeledDataset& data,
                        std::string_view id_prefix = "s");
// CSV: class_id, bin_low, bin_high, known_or_unknown
void write_split_manifest_csv(std::ostream& out, const ClassSplit& split);

// File name that encodes the factor values, e.g. dsprites_shape-heart_scale-3_...pgm
std::string sample_filename(Dataset d, const std::vector<int>& factors, std::string_view prefix);

}  // namespace ncdlab::expdesign
