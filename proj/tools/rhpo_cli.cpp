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

// Command-line front end: tune, sweep and bench subcommands.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rhpo/rhpo.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kRuntime = 3 };

struct DataArgs {
  std::string path;
  std::string target;
  std::vector<std::string> categorical;
  std::vector<std::string> missing{"", "NA", "?"};
  std::optional<std::string> positive;
  std::size_t folds = 3;
  std::uint64_t seed = 42;
  std::string space_path;
  std::string out;
  std::string format = "csv";
  std::size_t trials = 0;  // 0 = method default
};

void add_data_options(CLI::App& cmd, DataArgs& a) {
  cmd.add_option("--data", a.path, "CSV file with a header row")->required();
  cmd.add_option("--target", a.target, "Target column name")->required();
  cmd.add_option("--categorical", a.categorical, "Columns to one-hot encode")->delimiter(',');
  cmd.add_option("--missing", a.missing, "Tokens treated as missing")->delimiter(',');
  cmd.add_option("--positive", a.positive, "Target label mapped to class 1");
  cmd.add_option("--folds", a.folds, "Stratified K for cross-validation")->check(CLI::Range(2, 1000));
  cmd.add_option("--seed", a.seed, "Random seed");
  cmd.add_option("--space", a.space_path, "JSON search-space file")->check(CLI::ExistingFile);
  cmd.add_option("--trials", a.trials, "Trial budget");
  cmd.add_option("--out", a.out, "Report path (stdout when omitted)");
  cmd.add_option("--format", a.format, "Report format")->check(CLI::IsMember({"csv", "markdown"}));
}

rhpo::Dataset load(const DataArgs& a) {
  rhpo::CsvOptions opt;
  opt.target = a.target;
  opt.categorical = a.categorical;
  opt.missing_tokens = a.missing;
  opt.positive_label = a.positive;
  return rhpo::load_csv(a.path, opt);
}

rhpo::SearchSpace space_of(const DataArgs& a) {
  return a.space_path.empty() ? rhpo::default_space() : rhpo::load_space(a.space_path);
}

std::string label_of(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

void write_report(const rhpo::BenchReport& report, const std::string& format, const std::string& out) {
  if (out.empty()) {
    std::cout << (format == "csv" ? rhpo::format_csv(report) : rhpo::format_markdown(report));
  } else {
    rhpo::emit_report(report, format, out);
  }
}

int run_tune(const DataArgs& a, const std::string& method, std::optional<double> rate) {
  const auto data = load(a);
  const auto space = space_of(a);
  const auto ctx = rhpo::make_context(data, a.folds, a.seed, space);
  rhpo::TpeConfig tpe;

  rhpo::TuneResult r;
  if (method == "grid") {
    r = rhpo::grid_search(ctx, rhpo::default_grid(space));
  } else if (method == "random") {
    r = rhpo::random_search(ctx, a.trials ? a.trials : 10, a.seed);
  } else {
    tpe.n_trials = a.trials ? a.trials : 25;
    tpe.n_startup = std::min(tpe.n_startup, tpe.n_trials);
    r = method == "tpe" ? rhpo::smbo(ctx, tpe, a.seed)
                        : rhpo::randomized_hyperopt(ctx, rate.value_or(0.2), tpe, a.seed);
  }

  rhpo::BenchReport report;
  report.rows.push_back({label_of(a.path), method, r.sample_rate, r.best_mean_gini,
                         r.elapsed_seconds, r.full_data_mean_gini});
  write_report(report, a.format, a.out);

  std::cerr << "best mean Gini " << r.best_mean_gini << " over " << r.trials.size() << " trials";
  if (r.full_data_mean_gini) std::cerr << " (full-data re-check " << *r.full_data_mean_gini << ")";
  std::cerr << "\nbest params " << rhpo::to_json(r.best_params).dump() << "\n";
  return kOk;
}

int run_sweep(const DataArgs& a, const std::vector<double>& rates, double epsilon) {
  const auto data = load(a);
  const auto space = space_of(a);
  rhpo::TpeConfig tpe;
  tpe.n_trials = a.trials ? a.trials : 25;
  tpe.n_startup = std::min(tpe.n_startup, tpe.n_trials);
  const auto sweep = rhpo::rate_sweep(data, rates, space, tpe, a.folds, a.seed);

  rhpo::BenchReport report;
  for (const auto& row : sweep)
    report.rows.push_back({label_of(a.path), "randomized", row.rate, row.mean_gini,
                           row.time_seconds, row.full_data_mean_gini});
  write_report(report, a.format, a.out);
  std::cerr << "selected rate " << rhpo::select_best_rate(sweep, epsilon) << " (epsilon "
            << epsilon << ")\n";
  return kOk;
}

int run_bench(const std::string& config_path, const std::string& out_override) {
  auto cfg = rhpo::load_bench_config(config_path);
  if (!out_override.empty()) cfg.output = out_override;
  const auto outcome = rhpo::run_method_comparison(cfg);
  write_report(outcome.report, cfg.format, cfg.output);
  if (!outcome.report.metadata["errors"].empty()) {
    std::cerr << "dataset errors: " << outcome.report.metadata["errors"].dump() << "\n";
    return outcome.report.rows.empty() ? kData : kOk;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hyperparameter tuning for gradient-boosted trees: grid, random, TPE and "
               "Randomized-Hyperopt"};
  app.require_subcommand(1);
  app.set_version_flag("--version", rhpo::kVersion);

  DataArgs tune_args;
  std::string method;
  std::optional<double> rate;
  auto* tune = app.add_subcommand("tune", "Tune one dataset with one method");
  add_data_options(*tune, tune_args);
  tune->add_option("--method", method, "Tuning method")
      ->required()
      ->check(CLI::IsMember({"grid", "random", "tpe", "randomized"}));
  tune->add_option("--rate", rate, "Sampling rate for randomized")->check(CLI::Range(1e-9, 1.0));

  DataArgs sweep_args;
  std::vector<double> rates{0.1, 0.2, 0.25, 0.5};
  double epsilon = 0.002;
  auto* sweep = app.add_subcommand("sweep", "Randomized-Hyperopt over several sampling rates");
  add_data_options(*sweep, sweep_args);
  sweep->add_option("--rates", rates, "Comma-separated sampling rates")
      ->delimiter(',')
      ->check(CLI::Range(1e-9, 1.0));
  sweep->add_option("--epsilon", epsilon, "Gini tolerance for rate selection")
      ->check(CLI::NonNegativeNumber);

  std::string config_path, bench_out;
  auto* bench = app.add_subcommand("bench", "Four-method comparison from a JSON config");
  bench->add_option("--config", config_path, "BenchConfig JSON")->required()->check(CLI::ExistingFile);
  bench->add_option("--out", bench_out, "Override the config's output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*tune) return run_tune(tune_args, method, rate);
    if (*sweep) return run_sweep(sweep_args, rates, epsilon);
    if (*bench) return run_bench(config_path, bench_out);
  } catch (const rhpo::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const rhpo::InvalidArgument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}
