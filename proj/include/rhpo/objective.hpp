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

// The hyperparameter response function: a configuration is scored by the
// stratified cross-validated mean Gini of the boosted-tree learner and
// minimized as loss = -mean Gini.

#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rhpo/data.hpp"
#include "rhpo/error.hpp"
#include "rhpo/gbt.hpp"
#include "rhpo/metrics.hpp"
#include "rhpo/spaces.hpp"

namespace rhpo {

struct Trial {
  ParamAssignment params;
  std::vector<double> fold_ginis;
  double mean_gini = 0.0;
  double loss = 0.0;
  double wall_seconds = 0.0;
  std::size_t index = 0;
};

// Builds a trial from per-fold Ginis, keeping mean_gini and loss consistent.
inline Trial make_trial(ParamAssignment params, std::vector<double> fold_ginis, double wall_seconds,
                        std::size_t index) {
  Trial t;
  t.params = std::move(params);
  t.mean_gini = mean_gini(fold_ginis);
  t.fold_ginis = std::move(fold_ginis);
  t.loss = -t.mean_gini;
  t.wall_seconds = wall_seconds;
  t.index = index;
  return t;
}

inline double seconds_since(std::chrono::steady_clock::time_point start) {
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
  return std::max(dt.count(), 1e-9);
}

// Tuning space used when none is supplied.
inline SearchSpace default_space() {
  return SearchSpace({
      {"eta", LogUniform{0.005, 0.3}},
      {"max_depth", QUniform{2, 10, 1}},
      {"min_child_weight", QUniform{1, 10, 1}},
      {"subsample", Uniform{0.5, 1.0}},
      {"colsample", Uniform{0.5, 1.0}},
      {"l2_reg", LogUniform{1e-3, 10}},
      {"min_split_gain", Uniform{0, 5}},
      {"n_rounds", QUniform{50, 300, 50}},
  });
}

namespace detail {

inline double numeric_param(const std::string& name, const ParamValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  const auto& s = std::get<std::string>(v);
  if (auto num = parse_number(s)) return *num;
  throw InvalidArgument("hyperparameter '" + name + "' has non-numeric value '" + s + "'");
}

}  // namespace detail

// Overlays an assignment on learner defaults. Values outside the learner's
// legal range (e.g. from untruncated normal priors) are clamped.
inline GbtHyperParams apply_params(GbtHyperParams p, const ParamAssignment& params) {
  for (const auto& [name, value] : params.values()) {
    const double v = detail::numeric_param(name, value);
    auto count = [&](double lo) {
      return static_cast<std::size_t>(std::llround(std::max(v, lo)));
    };
    if (name == "eta" || name == "learning_rate") {
      p.eta = std::clamp(v, 1e-6, 1.0);
    } else if (name == "n_rounds" || name == "n_estimators") {
      p.n_rounds = count(0.0);
    } else if (name == "max_depth") {
      p.max_depth = count(1.0);
    } else if (name == "min_child_weight") {
      p.min_child_weight = std::max(v, 0.0);
    } else if (name == "min_split_gain" || name == "gamma") {
      p.min_split_gain = std::max(v, 0.0);
    } else if (name == "l2_reg" || name == "lambda") {
      p.l2_reg = std::max(v, 0.0);
    } else if (name == "subsample") {
      p.subsample = std::clamp(v, 1e-3, 1.0);
    } else if (name == "colsample" || name == "colsample_bytree") {
      p.colsample = std::clamp(v, 1e-3, 1.0);
    } else if (name == "base_score") {
      p.base_score = v;
    } else {
      throw InvalidArgument("unknown hyperparameter '" + name + "'");
    }
  }
  p.validate();
  return p;
}

// Everything one tuning run needs to score a configuration. The fold plan
// may cover a subsample of the dataset; it must only reference `rows`.
class ObjectiveContext {
 public:
  ObjectiveContext(const Dataset& data, Rows rows, FoldPlan folds, SearchSpace space,
                   GbtHyperParams learner_defaults = {}, std::uint64_t seed = 0)
      : data_(&data),
        rows_(std::move(rows)),
        folds_(std::move(folds)),
        space_(std::move(space)),
        defaults_(learner_defaults),
        seed_(seed) {
    std::sort(rows_.begin(), rows_.end());
    for (const auto& fold : folds_.folds) {
      for (const auto* part : {&fold.train, &fold.test}) {
        for (auto r : *part) {
          if (!std::binary_search(rows_.begin(), rows_.end(), r))
            throw InvalidArgument("fold plan references a row outside the context subset");
        }
      }
    }
    if (folds_.folds.empty()) throw InvalidArgument("fold plan has no folds");
  }

  const Dataset& dataset() const { return *data_; }
  const Rows& rows() const { return rows_; }
  const FoldPlan& fold_plan() const { return folds_; }
  const SearchSpace& space() const { return space_; }
  const GbtHyperParams& learner_defaults() const { return defaults_; }
  std::uint64_t seed() const { return seed_; }

 private:
  const Dataset* data_;
  Rows rows_;
  FoldPlan folds_;
  SearchSpace space_;
  GbtHyperParams defaults_;
  std::uint64_t seed_;
};

// Context whose stratified folds are built over `rows` with `seed`.
inline ObjectiveContext make_context(const Dataset& data, Rows rows, std::size_t k,
                                     std::uint64_t seed, SearchSpace space,
                                     GbtHyperParams learner_defaults = {}) {
  auto plan = stratified_kfold(data, rows, k, seed);
  return ObjectiveContext(data, std::move(rows), std::move(plan), std::move(space),
                          learner_defaults, seed);
}

inline ObjectiveContext make_context(const Dataset& data, std::size_t k, std::uint64_t seed,
                                     SearchSpace space, GbtHyperParams learner_defaults = {}) {
  return make_context(data, data.all_rows(), k, seed, std::move(space), learner_defaults);
}

// Scores `params` by K-fold mean Gini. The learner seed is seed ^ index so
// repeated evaluations of one trial are bit-identical.
inline Trial evaluate(const ObjectiveContext& ctx, const ParamAssignment& params,
                      std::size_t index) {
  if (!in_support(ctx.space(), params))
    throw InvalidArgument("assignment does not match the search space");
  const auto start = std::chrono::steady_clock::now();
  auto learner = apply_params(ctx.learner_defaults(), params);
  learner.seed = ctx.seed() ^ static_cast<std::uint64_t>(index);

  const auto& data = ctx.dataset();
  std::vector<double> ginis;
  ginis.reserve(ctx.fold_plan().folds.size());
  for (const auto& fold : ctx.fold_plan().folds) {
    const auto model = train(data, fold.train, learner);
    const auto scores = predict_margin(model, data, fold.test);
    std::vector<std::uint8_t> labels(fold.test.size());
    for (std::size_t i = 0; i < fold.test.size(); ++i)
      labels[i] = static_cast<std::uint8_t>(data.label(fold.test[i]));
    ginis.push_back(gini(roc_auc(scores, labels)));
  }
  return make_trial(params, std::move(ginis), seconds_since(start), index);
}

}  // namespace rhpo
