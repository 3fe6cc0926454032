/*
 * Copyright 2026 The rhpo Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rhpo/bench.hpp"
#include "test_util.hpp"

namespace rhpo {
namespace {

// Tiny space so comparisons finish in well under a second.
SearchSpace tiny_space() {
  return SearchSpace({{"eta", LogUniform{0.05, 0.3}},
                      {"max_depth", QUniform{1, 3, 1}},
                      {"n_rounds", QUniform{5, 15, 5}}});
}

BenchConfig tiny_config() {
  BenchConfig c;
  c.space = tiny_space();
  c.budgets.random_trials = 3;
  c.budgets.tpe_trials = 3;
  c.budgets.randomized_trials = 3;
  c.tpe.n_startup = 2;
  c.rates = {0.5, 0.25};
  return c;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("rhpo_bench_test_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SweepRow sweep_row(double rate, double g) {
  SweepRow r;
  r.rate = rate;
  r.mean_gini = g;
  return r;
}

TEST(SelectRateTest, SmallestWithinEpsilon) {
  const std::vector<SweepRow> s{sweep_row(0.1, 0.9990), sweep_row(0.2, 0.9998),
                                sweep_row(0.25, 0.9995), sweep_row(0.5, 0.9997)};
  EXPECT_EQ(select_best_rate(s, 0.002), 0.1);
  EXPECT_EQ(select_best_rate(s, 0.0), 0.2);
  EXPECT_EQ(select_best_rate(s, 0.0003), 0.2);

  const std::vector<SweepRow> t{sweep_row(0.1, 0.30), sweep_row(0.2, 0.31), sweep_row(0.5, 0.40)};
  EXPECT_EQ(select_best_rate(t, 0.002), 0.5);
  EXPECT_EQ(select_best_rate(t, 0.11), 0.1);
  EXPECT_THROW(select_best_rate({}, 0.002), InvalidArgument);
  EXPECT_THROW(select_best_rate(t, -1.0), InvalidArgument);
}

TEST(SelectRateTest, NonIncreasingInEpsilon) {
  Rng rng(3);
  for (int c = 0; c < 50; ++c) {
    std::vector<SweepRow> s;
    for (double r : {0.1, 0.2, 0.25, 0.5}) s.push_back(sweep_row(r, rng.uniform(0.3, 1.0)));
    double prev = 2.0;
    for (double eps : {0.0, 0.001, 0.01, 0.05, 0.2, 1.0}) {
      const double pick = select_best_rate(s, eps);
      EXPECT_LE(pick, prev);
      prev = pick;
    }
    EXPECT_EQ(select_best_rate(s, 1.0), 0.1);
  }
}

TEST(DefaultGridTest, CappedAndKeepsEndpoints) {
  const auto g = default_grid(default_space());
  EXPECT_LE(g.size(), 500u);
  EXPECT_GT(g.size(), 100u);
  double lo = 1e9, hi = -1e9;
  for (const auto& p : g) {
    EXPECT_TRUE(in_support(default_space(), p));
    lo = std::min(lo, p.real("max_depth"));
    hi = std::max(hi, p.real("max_depth"));
  }
  EXPECT_EQ(lo, 2.0);
  EXPECT_EQ(hi, 10.0);
  EXPECT_EQ(default_grid(tiny_space(), 2, 1000).size(), 2u * 3 * 3);
}

TEST(SweepTest, OneRowPerRateSorted) {
  const auto d = testing::synthetic(240, 90, 3, 1.0, 2);
  TpeConfig cfg;
  cfg.n_trials = 2;
  cfg.n_startup = 2;
  const auto s = rate_sweep(d, {0.5, 0.1, 0.25, 0.2}, tiny_space(), cfg, 3, 1);
  ASSERT_EQ(s.size(), 4u);
  const double expected[] = {0.1, 0.2, 0.25, 0.5};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(s[i].rate, expected[i]);
    EXPECT_EQ(s[i].result.sample_rate, expected[i]);
    EXPECT_TRUE(s[i].full_data_mean_gini.has_value());
  }
  EXPECT_THROW(rate_sweep(d, {}, tiny_space(), cfg, 3, 1), InvalidArgument);
  EXPECT_THROW(rate_sweep(d, {0.0}, tiny_space(), cfg, 3, 1), InvalidArgument);
}

TEST(ComparisonTest, FourRowsPerDatasetOverSharedPlan) {
  std::vector<NamedDataset> ds{{"a", testing::synthetic(200, 80, 3, 1.0, 4)},
                               {"b", testing::synthetic(150, 50, 2, 0.5, 5)}};
  const auto out = run_method_comparison(ds, tiny_config());
  ASSERT_EQ(out.report.rows.size(), 8u);
  const std::vector<std::string> order{"grid", "random", "tpe", "randomized"};
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(out.report.rows[i].dataset, i < 4 ? "a" : "b");
    EXPECT_EQ(out.report.rows[i].method, order[i % 4]);
    EXPECT_EQ(out.report.rows[i].rate.has_value(), i % 4 == 3);
  }
  for (const auto& run : out.runs) {
    for (const auto& m : {"grid", "random", "tpe"})
      EXPECT_EQ(run.results.at(m).search_plan, run.shared_plan);
    EXPECT_EQ(*run.results.at("randomized").full_data_plan, run.shared_plan);
    ASSERT_EQ(run.sweep.size(), 2u);
    EXPECT_EQ(out.report.metadata["selected_rates"][run.label].get<double>(), *run.selected_rate);
  }
  EXPECT_EQ(out.report.metadata["tool_version"], kVersion);
}

TEST(ComparisonTest, MethodFilterAndFixedRate) {
  auto cfg = tiny_config();
  cfg.methods = {"randomized", "random"};
  cfg.rate = 0.5;
  const auto out = run_method_comparison({{"a", testing::synthetic(200, 80, 3, 1.0, 4)}}, cfg);
  ASSERT_EQ(out.report.rows.size(), 2u);
  EXPECT_EQ(out.report.rows[0].method, "random");
  EXPECT_EQ(out.report.rows[1].method, "randomized");
  EXPECT_EQ(*out.report.rows[1].rate, 0.5);
  EXPECT_TRUE(out.runs[0].sweep.empty());

  cfg.methods = {"bogus"};
  EXPECT_THROW(run_method_comparison({}, cfg), InvalidArgument);
}

TEST(ReportTest, CsvFormatting) {
  BenchReport r;
  EXPECT_EQ(format_csv(r), "dataset,method,rate,mean_gini,time_seconds\n");
  r.rows.push_back({"banknote", "randomized", 0.2, 0.99981, 0.314, std::nullopt});
  r.rows.push_back({"banknote", "tpe", std::nullopt, 0.5, 12.0, std::nullopt});
  r.rows.push_back({"odd,name", "grid", std::nullopt, -0.03333, 0.006, std::nullopt});
  EXPECT_EQ(format_csv(r),
            "dataset,method,rate,mean_gini,time_seconds\n"
            "banknote,randomized,0.2,0.9998,0.31\n"
            "banknote,tpe,,0.5000,12.00\n"
            "\"odd,name\",grid,,-0.0333,0.01\n");
}

TEST(ReportTest, CsvRoundTrip) {
  BenchReport r;
  r.rows.push_back({"x", "grid", std::nullopt, 0.81234, 1.239, std::nullopt});
  r.rows.push_back({"x", "randomized", 0.25, 0.8, 0.1, 0.79});
  const auto path = temp_path("round.csv");
  emit_report(r, "csv", path);
  const auto back = parse_report_csv(slurp(path));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].dataset, "x");
  EXPECT_FALSE(back[0].rate.has_value());
  EXPECT_EQ(back[0].mean_gini, 0.8123);
  EXPECT_EQ(back[0].time_seconds, 1.24);
  EXPECT_EQ(*back[1].rate, 0.25);
  BenchReport again;
  again.rows = back;
  EXPECT_EQ(format_csv(again), format_csv(r));
  std::filesystem::remove(path);

  EXPECT_THROW(parse_report_csv("a,b\n"), DataError);
  EXPECT_THROW(emit_report(r, "xml", path), InvalidArgument);
}

TEST(ReportTest, Markdown) {
  BenchReport r;
  r.metadata = {{"tool_version", kVersion}, {"seed", 7}, {"folds", 3}};
  r.rows.push_back({"d", "randomized", 0.25, 0.9, 1.0, 0.91});
  r.rows.push_back({"d", "grid", std::nullopt, 0.8, 2.0, std::nullopt});
  const auto md = format_markdown(r);
  EXPECT_NE(md.find("seed 7"), std::string::npos);
  EXPECT_NE(md.find("| d | randomized | 25% | 0.9000 | 1.00 | 0.9100 |"), std::string::npos);
  EXPECT_NE(md.find("| d | grid |  | 0.8000 | 2.00 |  |"), std::string::npos);
}

TEST(ConfigTest, ParsesAndResolvesPaths) {
  const auto j = nlohmann::ordered_json::parse(R"({
    "datasets": [{"path": "d.csv", "target": "y", "categorical": ["c"], "positive": 2}],
    "methods": ["tpe"], "rates": [0.3], "seed": 9, "folds": 4,
    "budgets": {"tpe": 7}, "tpe": {"n_startup": 3},
    "space": {"eta": {"dist": "uniform", "lo": 0.1, "hi": 0.2}},
    "output": "out.md", "format": "markdown"})");
  const auto cfg = bench_config_from_json(j, "/base");
  ASSERT_EQ(cfg.datasets.size(), 1u);
  EXPECT_EQ(cfg.datasets[0].path, "/base/d.csv");
  EXPECT_EQ(cfg.datasets[0].label, "d");
  EXPECT_EQ(*cfg.datasets[0].csv.positive_label, "2");
  EXPECT_EQ(cfg.methods, std::vector<std::string>{"tpe"});
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.k, 4u);
  EXPECT_EQ(cfg.budgets.tpe_trials, 7u);
  EXPECT_EQ(cfg.tpe.n_startup, 3u);
  EXPECT_EQ(cfg.space->size(), 1u);
  EXPECT_EQ(cfg.output, "/base/out.md");

  EXPECT_THROW(bench_config_from_json(nlohmann::ordered_json::parse("{}")), InvalidArgument);
  EXPECT_THROW(bench_config_from_json(nlohmann::ordered_json::parse(
                   R"({"datasets": [], "methods": ["nope"]})")),
               InvalidArgument);
}

TEST(ConfigTest, LoadErrorsAreRecorded) {
  const auto good = temp_path("good.csv");
  {
    std::ofstream out(good);
    out << "x,y\n";
    Rng rng(1);
    for (int i = 0; i < 60; ++i) out << rng.normal() + (i % 2) << "," << i % 2 << "\n";
  }
  auto cfg = tiny_config();
  cfg.methods = {"random"};
  cfg.datasets = {{"missing", temp_path("does_not_exist.csv"), {"y", {}, {""}, std::nullopt}},
                  {"good", good, {"y", {}, {""}, std::nullopt}}};
  const auto out = run_method_comparison(cfg);
  ASSERT_EQ(out.report.rows.size(), 1u);
  EXPECT_EQ(out.report.rows[0].dataset, "good");
  EXPECT_TRUE(out.report.metadata["errors"].contains("missing"));
  std::filesystem::remove(good);
}

}  // namespace
}  // namespace rhpo
