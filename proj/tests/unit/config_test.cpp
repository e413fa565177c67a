#include <gtest/gtest.h>

#include "ncdlab/config.hpp"
#include "ncdlab/errors.hpp"

using namespace ncdlab;

TEST(Config, DefaultsFromEmptyObject) {
  const auto c = parse_run_config("{}");
  EXPECT_EQ(c.n_known, (std::vector<int>{2, 3, 4, 5, 6, 7, 8}));
  EXPECT_EQ(c.seeds.size(), 3u);
  EXPECT_EQ(c.templates().size(), 3u);
  EXPECT_EQ(c.pipeline.net.hidden_widths, (std::vector<int>{256, 64}));
}

TEST(Config, ParsesFields) {
  const auto c = parse_run_config(R"({
    "groups": ["B", "C"], "class_factor": "x_pos", "n_known": "2..4", "n_unknown": [1, 3],
    "split_mode": "extrap", "task": "gcd", "seeds": {"base": 10, "count": 2},
    "samples_per_class_train": 50, "net": {"hidden_widths": [32], "max_epochs": 7},
    "kmeans": {"restarts": 4, "normalize": true}, "label_map": "one_to_one",
    "capacity": {"n_known": 3, "widths_menu": [[2], [64]]}
  })");
  EXPECT_EQ(c.groups.size(), 2u);
  EXPECT_EQ(c.n_known, (std::vector<int>{2, 3, 4}));
  EXPECT_EQ(c.n_unknown, (std::vector<int>{1, 3}));
  EXPECT_EQ(c.modes, (std::vector<expdesign::SplitMode>{expdesign::SplitMode::extrapolation}));
  EXPECT_EQ(c.tasks, (std::vector<expdesign::Task>{expdesign::Task::gcd}));
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{10, 11}));
  EXPECT_EQ(c.pipeline.samples_per_class_train, 50);
  EXPECT_EQ(c.pipeline.net.max_epochs, 7);
  EXPECT_TRUE(c.pipeline.kmeans.normalize);
  EXPECT_EQ(c.pipeline.label_map, cluster::LabelMapMethod::one_to_one);
  EXPECT_EQ(c.capacity.widths_menu.size(), 2u);
  // x_pos templates: one in B per fixed factor choice, none in C
  for (const auto& t : c.templates()) EXPECT_EQ(t.class_factor(), "x_pos");
  EXPECT_EQ(c.templates().size(), 2u);
}

TEST(Config, RoundTripsThroughJson) {
  auto c = parse_run_config(R"({"templates": ["A-y_pos"], "n_known": [3, 5], "seeds": [4]})");
  const auto back = parse_run_config(to_json(c));
  EXPECT_EQ(back.template_ids, c.template_ids);
  EXPECT_EQ(back.n_known, c.n_known);
  EXPECT_EQ(back.seeds, c.seeds);
  EXPECT_EQ(back.pipeline.n_bins, c.pipeline.n_bins);
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(parse_run_config("{"), ParameterError);
  EXPECT_THROW(parse_run_config(R"({"bogus": 1})"), ParameterError);
  EXPECT_THROW(parse_run_config(R"({"net": {"depth": 3}})"), ParameterError);
  EXPECT_THROW(parse_run_config(R"({"task": "both_ways"})"), ParameterError);
  EXPECT_THROW(parse_run_config(R"({"n_known": "5..2"})"), ParameterError);
}

TEST(Config, IntList) {
  EXPECT_EQ(parse_int_list("3"), (std::vector<int>{3}));
  EXPECT_EQ(parse_int_list("1,4,6"), (std::vector<int>{1, 4, 6}));
  EXPECT_EQ(parse_int_list("2..5"), (std::vector<int>{2, 3, 4, 5}));
  EXPECT_THROW(parse_int_list("x"), ParameterError);
}
