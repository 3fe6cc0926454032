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

// Benchmark protocol: sampling-rate sweeps for Randomized-Hyperopt, the
// four-method comparison on shared folds, and CSV / Markdown reports.

#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rhpo/data.hpp"
#include "rhpo/error.hpp"
#include "rhpo/objective.hpp"
#include "rhpo/spaces.hpp"
#include "rhpo/tuners.hpp"

namespace rhpo {

inline constexpr const char* kVersion = "0.1.0";

inline const std::vector<std::string>& all_methods() {
  static const std::vector<std::string> m{"grid", "random", "tpe", "randomized"};
  return m;
}

struct DatasetSpec {
  std::string label;
  std::string path;
  CsvOptions csv;
};

struct Budgets {
  std::size_t random_trials = 10;
  std::size_t tpe_trials = 25;
  std::size_t randomized_trials = 25;
  std::size_t grid_resolution = 2;
  std::size_t grid_max_points = 500;
};

struct BenchConfig {
  std::vector<DatasetSpec> datasets;
  std::vector<std::string> methods = all_methods();
  std::vector<double> rates{0.10, 0.20, 0.25, 0.50};
  // Fixed rate for the comparison; unset means sweep `rates` and select.
  std::optional<double> rate;
  double epsilon = 0.002;
  std::size_t k = 3;
  std::uint64_t seed = 42;
  Budgets budgets;
  TpeConfig tpe;  // n_trials is overridden by the per-method budgets
  std::optional<SearchSpace> space;
  GbtHyperParams learner;
  std::string output;
  std::string format = "csv";

  void validate() const {
    if (methods.empty()) throw InvalidArgument("at least one method is required");
    for (const auto& m : methods)
      if (std::find(all_methods().begin(), all_methods().end(), m) == all_methods().end())
        throw InvalidArgument("unknown method '" + m + "'");
    if (k < 2) throw InvalidArgument("K must be >= 2");
    for (double r : rates)
      if (!(r > 0.0 && r <= 1.0)) throw InvalidArgument("rates must lie in (0, 1]");
    if (rate && !(*rate > 0.0 && *rate <= 1.0)) throw InvalidArgument("rate must lie in (0, 1]");
    if (!(epsilon >= 0.0)) throw InvalidArgument("epsilon must be >= 0");
    if (format != "csv" && format != "markdown") throw InvalidArgument("format must be csv or markdown");
  }
};

struct ReportRow {
  std::string dataset;
  std::string method;
  std::optional<double> rate;
  double mean_gini = 0.0;
  double time_seconds = 0.0;
  // Randomized-Hyperopt only; shown in Markdown, not part of the CSV schema.
  std::optional<double> full_data_mean_gini;
};

struct BenchReport {
  std::vector<ReportRow> rows;
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
};

// ---------------------------------------------------------------------------
// Rate sweep

struct SweepRow {
  double rate = 0.0;
  double mean_gini = 0.0;
  double time_seconds = 0.0;
  std::optional<double> full_data_mean_gini;
  TuneResult result;
};

// One Randomized-Hyperopt run per rate with the same seed and budget,
// ordered by rate.
inline std::vector<SweepRow> rate_sweep(const ObjectiveContext& full, std::vector<double> rates,
                                        const TpeConfig& config, std::uint64_t seed) {
  if (rates.empty()) throw InvalidArgument("rate sweep needs at least one rate");
  for (double r : rates)
    if (!(r > 0.0 && r <= 1.0)) throw InvalidArgument("rates must lie in (0, 1]");
  std::sort(rates.begin(), rates.end());
  std::vector<SweepRow> out;
  for (double r : rates) {
    auto res = randomized_hyperopt(full, r, config, seed);
    out.push_back({r, res.best_mean_gini, res.elapsed_seconds, res.full_data_mean_gini, std::move(res)});
  }
  return out;
}

inline std::vector<SweepRow> rate_sweep(const Dataset& data, std::vector<double> rates,
                                        const SearchSpace& space, const TpeConfig& config,
                                        std::size_t k, std::uint64_t seed,
                                        const GbtHyperParams& learner_defaults = {}) {
  const auto full = make_context(data, k, seed, space, learner_defaults);
  return rate_sweep(full, std::move(rates), config, seed);
}

// Smallest rate whose mean Gini is within `epsilon` of the best rate's.
inline double select_best_rate(const std::vector<SweepRow>& sweep, double epsilon = 0.002) {
  if (sweep.empty()) throw InvalidArgument("cannot select a rate from an empty sweep");
  if (!(epsilon >= 0.0)) throw InvalidArgument("epsilon must be >= 0");
  double best = sweep.front().mean_gini;
  for (const auto& r : sweep) best = std::max(best, r.mean_gini);
  std::optional<double> pick;
  for (const auto& r : sweep)
    if (r.mean_gini >= best - epsilon && (!pick || r.rate < *pick)) pick = r.rate;
  return *pick;
}

// ---------------------------------------------------------------------------
// Default grid

// Continuous dimensions at `resolution` points, quantized dimensions and
// choices enumerated, then the largest quantized axis is thinned (keeping
// its end points) until the product is at most `max_points` or every
// quantized axis is down to one value.
inline std::vector<ParamAssignment> default_grid(const SearchSpace& space, std::size_t resolution = 2,
                                                 std::size_t max_points = 500) {
  std::vector<std::vector<ParamValue>> axes;
  for (const auto& [name, dist] : space.dimensions()) axes.push_back(dimension_values(dist, resolution));
  std::vector<std::size_t> keep;
  for (const auto& a : axes) keep.push_back(a.size());
  auto product = [&] {
    std::size_t p = 1;
    for (auto c : keep) p *= c;
    return p;
  };
  while (product() > max_points) {
    std::optional<std::size_t> widest;
    for (std::size_t d = 0; d < axes.size(); ++d) {
      if (!is_quantized(space.dimensions()[d].second) || keep[d] <= 1) continue;
      if (!widest || keep[d] > keep[*widest]) widest = d;
    }
    if (!widest) break;
    --keep[*widest];
  }
  for (std::size_t d = 0; d < axes.size(); ++d) {
    if (keep[d] == axes[d].size()) continue;
    const auto& full = axes[d];
    std::vector<ParamValue> thinned;
    for (std::size_t i = 0; i < keep[d]; ++i) {
      const std::size_t j =
          keep[d] == 1 ? full.size() / 2
                       : static_cast<std::size_t>(std::llround(static_cast<double>(i) *
                                                               static_cast<double>(full.size() - 1) /
                                                               static_cast<double>(keep[d] - 1)));
      thinned.push_back(full[j]);
    }
    axes[d] = std::move(thinned);
  }
  return cartesian_product(space, axes);
}

// ---------------------------------------------------------------------------
// Method comparison

struct NamedDataset {
  std::string label;
  Dataset data;
};

// Per-dataset detail kept alongside the report rows.
struct DatasetRun {
  std::string label;
  FoldPlan shared_plan;
  std::map<std::string, TuneResult> results;
  std::vector<SweepRow> sweep;
  std::optional<double> selected_rate;
};

struct ComparisonOutcome {
  BenchReport report;
  std::vector<DatasetRun> runs;
};

namespace detail {

inline TpeConfig with_budget(TpeConfig c, std::size_t n_trials) {
  c.n_trials = n_trials;
  c.n_startup = std::min(c.n_startup, n_trials);
  return c;
}

inline nlohmann::ordered_json bench_metadata(const BenchConfig& cfg) {
  nlohmann::ordered_json m;
  m["tool_version"] = kVersion;
  m["seed"] = cfg.seed;
  m["folds"] = cfg.k;
  m["budgets"] = {{"random", cfg.budgets.random_trials},
                  {"tpe", cfg.budgets.tpe_trials},
                  {"randomized", cfg.budgets.randomized_trials},
                  {"grid_resolution", cfg.budgets.grid_resolution},
                  {"grid_max_points", cfg.budgets.grid_max_points}};
  m["methods"] = cfg.methods;
  m["selected_rates"] = nlohmann::ordered_json::object();
  m["errors"] = nlohmann::ordered_json::object();
  return m;
}

}  // namespace detail

// Runs every configured method on one dataset over one shared fold plan.
inline DatasetRun compare_methods(const std::string& label, const Dataset& data,
                                  const BenchConfig& cfg, BenchReport& report) {
  const SearchSpace space = cfg.space ? *cfg.space : default_space();
  const auto ctx = make_context(data, cfg.k, cfg.seed, space, cfg.learner);
  DatasetRun run{label, ctx.fold_plan(), {}, {}, std::nullopt};
  auto wants = [&](const char* m) {
    return std::find(cfg.methods.begin(), cfg.methods.end(), m) != cfg.methods.end();
  };

  // Rows follow the fixed method order regardless of the config's order.
  if (wants("grid")) {
    const auto grid = default_grid(space, cfg.budgets.grid_resolution, cfg.budgets.grid_max_points);
    run.results["grid"] = grid_search(ctx, grid);
  }
  if (wants("random")) run.results["random"] = random_search(ctx, cfg.budgets.random_trials, cfg.seed);
  if (wants("tpe"))
    run.results["tpe"] = smbo(ctx, detail::with_budget(cfg.tpe, cfg.budgets.tpe_trials), cfg.seed);
  if (wants("randomized")) {
    const auto tpe = detail::with_budget(cfg.tpe, cfg.budgets.randomized_trials);
    if (cfg.rate) {
      run.selected_rate = *cfg.rate;
      run.results["randomized"] = randomized_hyperopt(ctx, *cfg.rate, tpe, cfg.seed);
    } else {
      run.sweep = rate_sweep(ctx, cfg.rates, tpe, cfg.seed);
      run.selected_rate = select_best_rate(run.sweep, cfg.epsilon);
      for (const auto& row : run.sweep)
        if (row.rate == *run.selected_rate) run.results["randomized"] = row.result;
    }
    report.metadata["selected_rates"][label] = *run.selected_rate;
  }

  for (const auto& m : all_methods()) {
    const auto it = run.results.find(m);
    if (it == run.results.end()) continue;
    const auto& r = it->second;
    report.rows.push_back({label, m, r.sample_rate, r.best_mean_gini, r.elapsed_seconds,
                           r.full_data_mean_gini});
  }
  return run;
}

inline ComparisonOutcome run_method_comparison(const std::vector<NamedDataset>& datasets,
                                               const BenchConfig& cfg) {
  cfg.validate();
  ComparisonOutcome out;
  out.report.metadata = detail::bench_metadata(cfg);
  for (const auto& d : datasets) out.runs.push_back(compare_methods(d.label, d.data, cfg, out.report));
  return out;
}

// Loads each dataset from its CSV; a dataset that fails to load is skipped
// and its error recorded under metadata.errors.
inline ComparisonOutcome run_method_comparison(const BenchConfig& cfg) {
  cfg.validate();
  ComparisonOutcome out;
  out.report.metadata = detail::bench_metadata(cfg);
  for (const auto& spec : cfg.datasets) {
    Dataset data;
    try {
      data = load_csv(spec.path, spec.csv);
    } catch (const DataError& e) {
      out.report.metadata["errors"][spec.label] = e.what();
      continue;
    }
    try {
      out.runs.push_back(compare_methods(spec.label, data, cfg, out.report));
    } catch (const DataError& e) {
      out.report.metadata["errors"][spec.label] = e.what();
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports

namespace detail {

inline std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline std::string shortest(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

}  // namespace detail

inline constexpr const char* kReportHeader = "dataset,method,rate,mean_gini,time_seconds";

// Gini to 4 decimals, seconds to 2; rate empty unless Randomized-Hyperopt.
inline std::string format_csv(const BenchReport& report) {
  std::string out = std::string(kReportHeader) + "\n";
  for (const auto& r : report.rows) {
    out += detail::csv_field(r.dataset) + "," + detail::csv_field(r.method) + ",";
    if (r.rate) out += detail::shortest(*r.rate);
    out += "," + detail::fixed(r.mean_gini, 4) + "," + detail::fixed(r.time_seconds, 2) + "\n";
  }
  return out;
}

inline std::string format_markdown(const BenchReport& report) {
  std::ostringstream out;
  if (report.metadata.contains("tool_version")) {
    out << "<!-- rhpo " << report.metadata["tool_version"].get<std::string>() << ", seed "
        << report.metadata.value("seed", 0) << ", K=" << report.metadata.value("folds", 0)
        << " -->\n\n";
  }
  out << "| Dataset | Method | Sampling rate | Mean Gini | Time (s) | Full-data Gini |\n";
  out << "|---|---|---|---|---|---|\n";
  for (const auto& r : report.rows) {
    out << "| " << r.dataset << " | " << r.method << " | "
        << (r.rate ? detail::fixed(*r.rate * 100.0, 0) + "%" : std::string()) << " | "
        << detail::fixed(r.mean_gini, 4) << " | " << detail::fixed(r.time_seconds, 2) << " | "
        << (r.full_data_mean_gini ? detail::fixed(*r.full_data_mean_gini, 4) : std::string())
        << " |\n";
  }
  return out.str();
}

inline void emit_report(const BenchReport& report, const std::string& format, const std::string& path) {
  std::string text;
  if (format == "csv")
    text = format_csv(report);
  else if (format == "markdown")
    text = format_markdown(report);
  else
    throw InvalidArgument("unknown report format '" + format + "'");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

inline std::vector<ReportRow> parse_report_csv(std::string_view text) {
  const auto records = detail::parse_csv_records(text);
  if (records.empty()) throw DataError("report is empty");
  std::string header;
  for (std::size_t i = 0; i < records[0].size(); ++i) header += (i ? "," : "") + records[0][i];
  if (header != kReportHeader) throw DataError("unexpected report header '" + header + "'");
  std::vector<ReportRow> rows;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.size() != 5) throw DataError("report row " + std::to_string(i + 1) + " needs 5 fields");
    ReportRow r;
    r.dataset = rec[0];
    r.method = rec[1];
    if (!rec[2].empty()) r.rate = detail::parse_number(rec[2]);
    const auto g = detail::parse_number(rec[3]);
    const auto t = detail::parse_number(rec[4]);
    if (!g || !t) throw DataError("report row " + std::to_string(i + 1) + " has non-numeric fields");
    r.mean_gini = *g;
    r.time_seconds = *t;
    rows.push_back(std::move(r));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// BenchConfig JSON; relative paths resolve against `base_dir`.

inline BenchConfig bench_config_from_json(const nlohmann::ordered_json& j,
                                          const std::filesystem::path& base_dir = {}) {
  BenchConfig cfg;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return (path.is_relative() && !base_dir.empty() ? base_dir / path : path).string();
  };
  try {
    if (!j.is_object()) throw InvalidArgument("bench config must be a JSON object");
    for (const auto& d : j.at("datasets")) {
      DatasetSpec spec;
      spec.path = resolve(d.at("path").get<std::string>());
      spec.label = d.value("label", std::filesystem::path(spec.path).stem().string());
      spec.csv.target = d.at("target").get<std::string>();
      spec.csv.categorical = d.value("categorical", std::vector<std::string>{});
      if (d.contains("missing")) spec.csv.missing_tokens = d["missing"].get<std::vector<std::string>>();
      if (d.contains("positive")) {
        const auto& p = d["positive"];
        spec.csv.positive_label = p.is_string() ? p.get<std::string>() : p.dump();
      }
      cfg.datasets.push_back(std::move(spec));
    }
    if (j.contains("methods")) cfg.methods = j["methods"].get<std::vector<std::string>>();
    if (j.contains("rates")) cfg.rates = j["rates"].get<std::vector<double>>();
    if (j.contains("rate") && !j["rate"].is_null()) cfg.rate = j["rate"].get<double>();
    cfg.epsilon = j.value("epsilon", cfg.epsilon);
    cfg.k = j.value("folds", cfg.k);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("budgets")) {
      const auto& b = j["budgets"];
      cfg.budgets.random_trials = b.value("random", cfg.budgets.random_trials);
      cfg.budgets.tpe_trials = b.value("tpe", cfg.budgets.tpe_trials);
      cfg.budgets.randomized_trials = b.value("randomized", cfg.budgets.randomized_trials);
      cfg.budgets.grid_resolution = b.value("grid_resolution", cfg.budgets.grid_resolution);
      cfg.budgets.grid_max_points = b.value("grid_max_points", cfg.budgets.grid_max_points);
    }
    if (j.contains("tpe")) {
      const auto& t = j["tpe"];
      cfg.tpe.n_startup = t.value("n_startup", cfg.tpe.n_startup);
      cfg.tpe.gamma_quantile = t.value("gamma_quantile", cfg.tpe.gamma_quantile);
      cfg.tpe.n_candidates = t.value("n_candidates", cfg.tpe.n_candidates);
      cfg.tpe.bandwidth_floor = t.value("bandwidth_floor", cfg.tpe.bandwidth_floor);
      cfg.tpe.adaptive_floor = t.value("adaptive_floor", cfg.tpe.adaptive_floor);
    }
    if (j.contains("space")) {
      const auto& s = j["space"];
      cfg.space = s.is_string() ? load_space(resolve(s.get<std::string>())) : space_from_json(s);
    }
    if (j.contains("output")) cfg.output = resolve(j["output"].get<std::string>());
    cfg.format = j.value("format", cfg.format);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("bench config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

inline BenchConfig load_bench_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open bench config '" + path + "'");
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(std::string("bench config is not valid JSON: ") + e.what());
  }
  return bench_config_from_json(j, std::filesystem::path(path).parent_path());
}

}  // namespace rhpo
