#include "ncdlab/expdesign.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "ncdlab/errors.hpp"
#include "ncdlab/rng.hpp"

namespace ncdlab::expdesign {

namespace {

constexpr std::uint64_t kTestSalt = 0x7465737431ULL;
constexpr std::uint64_t kTrainSalt = 0x747261696eULL;
constexpr std::uint64_t kTieSalt = 0x746965ULL;

// Above this many tuples the train complement is sampled by rejection instead
// of being enumerated.
constexpr std::uint64_t kEnumerationLimit = 1ULL << 20;

int fixed_middle(int value_count) { return value_count / 2; }

FactorRole role(std::string name, Role r, std::optional<int> fixed = std::nullopt) {
  return FactorRole{std::move(name), r, fixed};
}

// Index of the j-th of n evenly spaced picks among m slots; exact .5 ties
// go up or down for the whole split.
int even_pick(int m, int n, int j, bool round_up) {
  long num = 0;
  long den = 0;
  if (n == 1) {
    num = m - 1;
    den = 2;
  } else {
    num = static_cast<long>(j) * (m - 1);
    den = n - 1;
  }
  long q = num / den;
  long twice_r = 2 * (num % den);
  if (twice_r > den || (twice_r == den && round_up)) ++q;
  return static_cast<int>(q);
}

struct TupleSpace {
  std::vector<int> lows;
  std::vector<int> widths;
  std::uint64_t size = 1;

  std::vector<int> tuple(std::uint64_t index) const {
    std::vector<int> out(lows.size());
    for (std::size_t f = lows.size(); f-- > 0;) {
      auto w = static_cast<std::uint64_t>(widths[f]);
      out[f] = lows[f] + static_cast<int>(index % w);
      index /= w;
    }
    return out;
  }
};

TupleSpace class_tuple_space(const ExperimentSpec& spec, const ValueInterval& bin) {
  const auto& schema = factor_schema(spec.dataset);
  TupleSpace space;
  for (std::size_t f = 0; f < schema.size(); ++f) {
    const auto& r = spec.roles[f];
    int low = 0;
    int width = schema[f].value_count;
    if (r.role == Role::class_defining) {
      low = bin.low;
      width = bin.width();
    } else if (r.role == Role::fixed) {
      low = *r.fixed_value;
      width = 1;
    }
    space.lows.push_back(low);
    space.widths.push_back(width);
    space.size *= static_cast<std::uint64_t>(width);
  }
  return space;
}

std::vector<std::uint64_t> draw_uniform(Rng& rng, std::uint64_t universe, int count) {
  std::vector<std::uint64_t> out(count);
  for (auto& v : out) v = rng.uniform_index(universe);
  return out;
}

std::vector<std::uint64_t> draw_excluding(Rng& rng, std::uint64_t universe,
                                          const std::unordered_set<std::uint64_t>& excluded,
                                          int count, int class_id) {
  if (count == 0) return {};
  if (excluded.size() >= universe) {
    throw InfeasibleError("class " + std::to_string(class_id) + " has only " +
                          std::to_string(universe) +
                          " factor tuples, all used by the test set; train/test cannot be disjoint");
  }
  std::vector<std::uint64_t> out;
  out.reserve(count);
  if (universe <= kEnumerationLimit) {
    std::vector<std::uint64_t> pool;
    pool.reserve(universe - excluded.size());
    for (std::uint64_t i = 0; i < universe; ++i)
      if (!excluded.contains(i)) pool.push_back(i);
    for (int k = 0; k < count; ++k) out.push_back(pool[rng.uniform_index(pool.size())]);
  } else {
    while (static_cast<int>(out.size()) < count) {
      auto i = rng.uniform_index(universe);
      if (!excluded.contains(i)) out.push_back(i);
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(Group g) {
  switch (g) {
    case Group::A:
      return "A";
    case Group::B:
      return "B";
    case Group::C:
      return "C";
  }
  return "?";
}

std::string_view to_string(Dataset d) {
  return d == Dataset::dsprites ? "dsprites" : "squircle";
}

std::string_view to_string(Role r) {
  switch (r) {
    case Role::class_defining:
      return "class_defining";
    case Role::fixed:
      return "fixed";
    case Role::variable:
      return "variable";
  }
  return "?";
}

std::string_view to_string(SplitMode m) {
  return m == SplitMode::interpolation ? "interp" : "extrap";
}

std::string_view to_string(Task t) { return t == Task::ncd ? "ncd" : "gcd"; }

Group parse_group(std::string_view s) {
  if (s == "A" || s == "a") return Group::A;
  if (s == "B" || s == "b") return Group::B;
  if (s == "C" || s == "c") return Group::C;
  throw ParameterError("unknown experiment group '" + std::string(s) + "'");
}

SplitMode parse_split_mode(std::string_view s) {
  if (s == "interp" || s == "interpolation") return SplitMode::interpolation;
  if (s == "extrap" || s == "extrapolation") return SplitMode::extrapolation;
  throw ParameterError("unknown split mode '" + std::string(s) + "'");
}

Task parse_task(std::string_view s) {
  if (s == "ncd" || s == "NCD") return Task::ncd;
  if (s == "gcd" || s == "GCD") return Task::gcd;
  throw ParameterError("unknown task '" + std::string(s) + "'");
}

const std::vector<FactorSpec>& factor_schema(Dataset d) {
  using namespace shapegen;
  static const std::vector<FactorSpec> dsprites = {
      {"shape", kSpriteShapes, "square, ellipse, heart"},
      {"scale", kSpriteScales, "size multiplier 0.5 + 0.1 * value"},
      {"orientation", kSpriteOrientations, "rotation 2*pi*value/40"},
      {"x_pos", kSpritePositions, "horizontal position, 16 = canvas centre"},
      {"y_pos", kSpritePositions, "vertical position, 16 = canvas centre"},
  };
  static const std::vector<FactorSpec> squircle = {
      {"shape_idx", kSquircleShapes, "square (0) to circle (19), alpha = value/19"},
      {"x_shift", kSquircleShifts, "horizontal shift, 2 px per step"},
      {"y_shift", kSquircleShifts, "vertical shift, 2 px per step"},
  };
  return d == Dataset::dsprites ? dsprites : squircle;
}

int factor_index(Dataset d, std::string_view name) {
  const auto& schema = factor_schema(d);
  for (std::size_t i = 0; i < schema.size(); ++i)
    if (schema[i].name == name) return static_cast<int>(i);
  throw ParameterError("dataset " + std::string(to_string(d)) + " has no factor '" +
                       std::string(name) + "'");
}

const FactorRole& ExperimentSpec::class_role() const {
  for (const auto& r : roles)
    if (r.role == Role::class_defining) return r;
  throw ParameterError("experiment " + id + " has no class-defining factor");
}

int ExperimentSpec::class_value_count() const {
  return factor_schema(dataset)[factor_index(dataset, class_factor())].value_count;
}

void validate(const ExperimentSpec& spec) {
  const auto& schema = factor_schema(spec.dataset);
  if (spec.roles.size() != schema.size())
    throw ParameterError("experiment " + spec.id + ": expected one role per factor");
  int n_class = 0;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& r = spec.roles[i];
    if (r.factor_name != schema[i].name)
      throw ParameterError("experiment " + spec.id + ": role order must follow the schema");
    if (r.role == Role::class_defining) ++n_class;
    if ((r.role == Role::fixed) != r.fixed_value.has_value())
      throw ParameterError("experiment " + spec.id + ": fixed_value is required iff role is fixed");
    if (r.fixed_value && (*r.fixed_value < 0 || *r.fixed_value >= schema[i].value_count))
      throw ParameterError("experiment " + spec.id + ": fixed value out of range for " +
                           r.factor_name);
  }
  if (n_class != 1)
    throw ParameterError("experiment " + spec.id + ": exactly one class-defining factor required");
  if (spec.n_known < 2) throw ParameterError("n_known must be >= 2");
  if (spec.n_unknown < 1) throw ParameterError("n_unknown must be >= 1");
  if (spec.samples_per_class_train < 0 || spec.samples_per_class_test < 1)
    throw ParameterError("sample counts must be positive");
  if (spec.n_bins < 2 || spec.n_bins > spec.class_value_count())
    throw InfeasibleError("n_bins = " + std::to_string(spec.n_bins) + " not in [2, " +
                          std::to_string(spec.class_value_count()) + "]");
  if (spec.n_known + spec.n_unknown > spec.n_bins)
    throw InfeasibleError("n_known + n_unknown = " +
                          std::to_string(spec.n_known + spec.n_unknown) +
                          " exceeds the class-bin budget " + std::to_string(spec.n_bins));
}

std::vector<ExperimentSpec> enumerate_experiments(Group group) {
  using shapegen::SpriteShape;
  std::vector<ExperimentSpec> out;
  const std::vector<std::string> movable = {"orientation", "x_pos", "y_pos"};

  auto dsprites_roles = [&](std::optional<int> shape, const std::string& cls,
                            const std::string& fixed) {
    std::vector<FactorRole> roles;
    roles.push_back(shape ? role("shape", Role::fixed, *shape) : role("shape", Role::variable));
    roles.push_back(role("scale", Role::fixed, fixed_middle(shapegen::kSpriteScales)));
    for (const auto& name : movable) {
      if (name == cls) {
        roles.push_back(role(name, Role::class_defining));
      } else if (name == fixed) {
        int count = factor_schema(Dataset::dsprites)[factor_index(Dataset::dsprites, name)].value_count;
        roles.push_back(role(name, Role::fixed, fixed_middle(count)));
      } else {
        roles.push_back(role(name, Role::variable));
      }
    }
    return roles;
  };

  switch (group) {
    case Group::A:
      // The heart is the only sprite without rotational symmetry, so
      // orientation bins never alias.
      for (const auto& cls : movable) {
        ExperimentSpec s;
        s.id = "A-" + cls;
        s.group = Group::A;
        s.dataset = Dataset::dsprites;
        s.roles = dsprites_roles(static_cast<int>(SpriteShape::heart), cls, "");
        out.push_back(std::move(s));
      }
      break;
    case Group::B:
      for (const auto& cls : movable) {
        for (const auto& fixed : movable) {
          if (fixed == cls) continue;
          ExperimentSpec s;
          s.id = "B-" + cls + "-fixed-" + fixed;
          s.group = Group::B;
          s.dataset = Dataset::dsprites;
          s.roles = dsprites_roles(std::nullopt, cls, fixed);
          out.push_back(std::move(s));
        }
      }
      break;
    case Group::C:
      for (const auto& cls : {"shape_idx", "x_shift", "y_shift"}) {
        ExperimentSpec s;
        s.id = std::string("C-") + cls;
        s.group = Group::C;
        s.dataset = Dataset::squircle;
        for (const auto& f : factor_schema(Dataset::squircle))
          s.roles.push_back(role(f.name, f.name == cls ? Role::class_defining : Role::variable));
        out.push_back(std::move(s));
      }
      break;
  }
  return out;
}

ExperimentSpec find_template(std::string_view id) {
  for (auto g : {Group::A, Group::B, Group::C})
    for (auto& s : enumerate_experiments(g))
      if (s.id == id) return s;
  throw ParameterError("unknown experiment template '" + std::string(id) + "'");
}

std::vector<ValueInterval> bin_classes(int factor_value_count, int n_classes) {
  if (n_classes < 1) throw ParameterError("n_classes must be positive");
  if (n_classes > factor_value_count)
    throw InfeasibleError("cannot split " + std::to_string(factor_value_count) + " values into " +
                          std::to_string(n_classes) + " classes");
  std::vector<ValueInterval> bins;
  bins.reserve(n_classes);
  const int base = factor_value_count / n_classes;
  const int extra = factor_value_count % n_classes;
  int low = 0;
  for (int i = 0; i < n_classes; ++i) {
    int width = base + (i < extra ? 1 : 0);
    bins.push_back({low, low + width - 1});
    low += width;
  }
  return bins;
}

ClassSplit split_classes(const std::vector<ValueInterval>& bins, int n_known, int n_unknown,
                         SplitMode mode, std::uint64_t seed) {
  const int len = static_cast<int>(bins.size());
  if (n_known < 1 || n_unknown < 1) throw ParameterError("n_known and n_unknown must be positive");
  if (mode == SplitMode::interpolation && n_known < 2)
    throw ParameterError("interpolation needs n_known >= 2");
  if (n_known + n_unknown > len)
    throw InfeasibleError("n_known + n_unknown exceeds the " + std::to_string(len) + " bins");

  ClassSplit split;
  split.class_bins = bins;
  if (mode == SplitMode::extrapolation) {
    for (int i = 0; i < n_known; ++i) split.known_ids.push_back(i);
    for (int i = n_known; i < n_known + n_unknown; ++i) split.unknown_ids.push_back(i);
    return split;
  }

  Rng rng(derive_seed(seed, {kTieSalt}));
  const bool round_up = (rng.next() & 1ULL) != 0;
  for (int i = 0; i < n_known; ++i) split.known_ids.push_back(even_pick(len, n_known, i, round_up));

  std::vector<int> eligible;
  for (int i = split.known_ids.front() + 1; i < split.known_ids.back(); ++i)
    if (!std::binary_search(split.known_ids.begin(), split.known_ids.end(), i))
      eligible.push_back(i);
  const int m = static_cast<int>(eligible.size());
  if (n_unknown > m)
    throw InfeasibleError("only " + std::to_string(m) + " interior bins available for " +
                          std::to_string(n_unknown) + " interpolation unknowns");
  for (int j = 0; j < n_unknown; ++j)
    split.unknown_ids.push_back(eligible[even_pick(m, n_unknown, j, round_up)]);
  return split;
}

bool split_is_valid(const ClassSplit& split, SplitMode mode) {
  const int len = static_cast<int>(split.class_bins.size());
  if (split.known_ids.empty() || split.unknown_ids.empty()) return false;
  std::set<int> known(split.known_ids.begin(), split.known_ids.end());
  std::set<int> unknown(split.unknown_ids.begin(), split.unknown_ids.end());
  if (known.size() != split.known_ids.size() || unknown.size() != split.unknown_ids.size())
    return false;
  for (int id : unknown)
    if (known.contains(id)) return false;
  for (int id : split.known_ids)
    if (id < 0 || id >= len) return false;
  for (int id : split.unknown_ids)
    if (id < 0 || id >= len) return false;
  // Bins are value-ordered, so index order is value order.
  const int lo = *known.begin();
  const int hi = *known.rbegin();
  for (int id : unknown) {
    bool inside = id > lo && id < hi;
    bool outside = id < lo || id > hi;
    if (mode == SplitMode::interpolation && !inside) return false;
    if (mode == SplitMode::extrapolation && !outside) return false;
  }
  return true;
}

std::map<int, int> LabeledDataset::class_counts() const {
  std::map<int, int> counts;
  for (const auto& s : samples) ++counts[s.label];
  return counts;
}

bool LabeledDataset::balanced() const {
  auto counts = class_counts();
  if (counts.empty()) return true;
  int first = counts.begin()->second;
  return std::all_of(counts.begin(), counts.end(), [&](const auto& kv) { return kv.second == first; });
}

std::vector<int> LabeledDataset::labels() const {
  std::vector<int> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.label);
  return out;
}

shapegen::BinaryImage render_sample(Dataset d, const std::vector<int>& factors) {
  if (d == Dataset::dsprites) {
    if (factors.size() != 5) throw ParameterError("dsprites samples carry 5 factors");
    shapegen::DSpritesFactors f;
    f.shape = static_cast<shapegen::SpriteShape>(factors[0]);
    f.scale = factors[1];
    f.orientation = factors[2];
    f.x_pos = factors[3];
    f.y_pos = factors[4];
    return shapegen::render_dsprites(f);
  }
  if (factors.size() != 3) throw ParameterError("squircle samples carry 3 factors");
  return shapegen::render_squircle({factors[0], factors[1], factors[2]});
}

MaterializedSplit materialize(const ExperimentSpec& spec, const ClassSplit& split) {
  validate(spec);
  if (static_cast<int>(split.known_ids.size()) != spec.n_known ||
      static_cast<int>(split.unknown_ids.size()) != spec.n_unknown)
    throw ParameterError("split sizes do not match the experiment spec");
  if (!split_is_valid(split, spec.split_mode))
    throw ParameterError("class split violates the " + std::string(to_string(spec.split_mode)) +
                         " conditions");

  std::set<int> known(split.known_ids.begin(), split.known_ids.end());
  std::vector<int> test_classes = split.unknown_ids;
  if (spec.task == Task::gcd) {
    test_classes.insert(test_classes.end(), split.known_ids.begin(), split.known_ids.end());
    std::sort(test_classes.begin(), test_classes.end());
  }

  auto test_draws = [&](int cls, const TupleSpace& space) {
    Rng rng(derive_seed(spec.seed, {static_cast<std::uint64_t>(cls), kTestSalt}));
    return draw_uniform(rng, space.size, spec.samples_per_class_test);
  };

  auto make_sample = [&](const TupleSpace& space, std::uint64_t index, int cls) {
    Sample s;
    s.factors = space.tuple(index);
    s.image = render_sample(spec.dataset, s.factors);
    s.label = cls;
    s.known = known.contains(cls);
    return s;
  };

  MaterializedSplit out;
  out.train.dataset = spec.dataset;
  out.test.dataset = spec.dataset;

  for (int cls : split.known_ids) {
    auto space = class_tuple_space(spec, split.class_bins.at(cls));
    auto test = test_draws(cls, space);
    std::unordered_set<std::uint64_t> excluded(test.begin(), test.end());
    Rng rng(derive_seed(spec.seed, {static_cast<std::uint64_t>(cls), kTrainSalt}));
    for (auto idx : draw_excluding(rng, space.size, excluded, spec.samples_per_class_train, cls))
      out.train.samples.push_back(make_sample(space, idx, cls));
  }
  for (int cls : test_classes) {
    auto space = class_tuple_space(spec, split.class_bins.at(cls));
    for (auto idx : test_draws(cls, space)) out.test.samples.push_back(make_sample(space, idx, cls));
  }
  return out;
}

void write_manifest_csv(std::ostream& out, const LabeledDataset& data, std::string_view id_prefix) {
  const auto& schema = factor_schema(data.dataset);
  out << "sample_id,dataset";
  for (const auto& f : schema) out << ',' << f.name;
  out << ",class_label\n";
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    const auto& s = data.samples[i];
    out << id_prefix << i << ',' << to_string(data.dataset);
    for (std::size_t f = 0; f < schema.size(); ++f) {
      out << ',';
      if (data.dataset == Dataset::dsprites && f == 0)
        out << shapegen::to_string(static_cast<shapegen::SpriteShape>(s.factors[f]));
      else
        out << s.factors[f];
    }
    out << ',' << s.label << '\n';
  }
}

void write_split_manifest_csv(std::ostream& out, const ClassSplit& split) {
  std::set<int> known(split.known_ids.begin(), split.known_ids.end());
  std::set<int> unknown(split.unknown_ids.begin(), split.unknown_ids.end());
  out << "class_id,bin_low,bin_high,known_or_unknown\n";
  for (std::size_t i = 0; i < split.class_bins.size(); ++i) {
    int id = static_cast<int>(i);
    if (!known.contains(id) && !unknown.contains(id)) continue;
    out << id << ',' << split.class_bins[i].low << ',' << split.class_bins[i].high << ','
        << (known.contains(id) ? "known" : "unknown") << '\n';
  }
}

std::string sample_filename(Dataset d, const std::vector<int>& factors, std::string_view prefix) {
  const auto& schema = factor_schema(d);
  std::ostringstream name;
  name << prefix << '_' << to_string(d);
  for (std::size_t f = 0; f < schema.size() && f < factors.size(); ++f) {
    name << '_' << schema[f].name << '-';
    if (d == Dataset::dsprites && f == 0)
      name << shapegen::to_string(static_cast<shapegen::SpriteShape>(factors[f]));
    else
      name << factors[f];
  }
  name << ".pgm";
  return name.str();
}

}  // namespace ncdlab::expdesign
