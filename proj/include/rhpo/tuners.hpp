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

// Hyperparameter optimizers: grid search, random search, sequential
// model-based optimization with a Tree-structured Parzen Estimator, and
// Randomized-Hyperopt (TPE run on a stratified subsample of the data).

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rhpo/data.hpp"
#include "rhpo/error.hpp"
#include "rhpo/objective.hpp"
#include "rhpo/random.hpp"
#include "rhpo/spaces.hpp"

namespace rhpo {

struct TuneResult {
  ParamAssignment best_params;
  double best_mean_gini = 0.0;
  std::vector<Trial> trials;
  double elapsed_seconds = 0.0;
  std::string method;
  // Folds the trials were scored on.
  FoldPlan search_plan;

  // Randomized-Hyperopt only.
  std::optional<double> sample_rate;
  Rows sample_rows;
  std::optional<double> full_data_mean_gini;
  std::optional<double> full_data_seconds;
  std::optional<FoldPlan> full_data_plan;
};

struct TpeConfig {
  std::size_t n_trials = 25;
  std::size_t n_startup = 10;
  double gamma_quantile = 0.25;
  std::size_t n_candidates = 24;
  double bandwidth_floor = 1e-3;
  // Also floor kernel widths at scale / min(100, n + 1) for n observations,
  // so a tight cluster of good trials cannot collapse the search.
  bool adaptive_floor = true;

  void validate() const {
    if (n_trials < 1) throw InvalidArgument("n_trials must be >= 1");
    if (n_startup > n_trials) throw InvalidArgument("n_startup must not exceed n_trials");
    if (!(gamma_quantile > 0.0 && gamma_quantile < 1.0))
      throw InvalidArgument("gamma_quantile must be in (0, 1)");
    if (n_candidates < 1) throw InvalidArgument("n_candidates must be >= 1");
    if (!(bandwidth_floor > 0.0)) throw InvalidArgument("bandwidth_floor must be > 0");
  }
};

// Anything that scores an assignment as trial number `index`.
template <typename F>
concept TrialFunction = requires(F f, const ParamAssignment& p, std::size_t i) {
  { f(p, i) } -> std::convertible_to<Trial>;
};

// Adapts a plain loss function (lower is better) to a TrialFunction; the
// trial's single "fold" Gini is -loss.
template <typename LossFn>
auto loss_objective(LossFn loss) {
  return [loss = std::move(loss)](const ParamAssignment& p, std::size_t index) {
    const auto start = std::chrono::steady_clock::now();
    const double l = loss(p);
    return make_trial(p, {-l}, seconds_since(start), index);
  };
}

inline auto context_objective(const ObjectiveContext& ctx) {
  return [&ctx](const ParamAssignment& p, std::size_t index) { return evaluate(ctx, p, index); };
}

namespace detail {

// Best = highest mean Gini, earliest trial on ties.
inline TuneResult finish(std::string method, std::vector<Trial> trials,
                         std::chrono::steady_clock::time_point start) {
  TuneResult r;
  r.method = std::move(method);
  if (!trials.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < trials.size(); ++i)
      if (trials[i].mean_gini > trials[best].mean_gini) best = i;
    r.best_params = trials[best].params;
    r.best_mean_gini = trials[best].mean_gini;
  }
  r.trials = std::move(trials);
  r.elapsed_seconds = seconds_since(start);
  return r;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Grid and random search

template <TrialFunction F>
TuneResult grid_search(const std::vector<ParamAssignment>& grid, F&& objective) {
  if (grid.empty()) throw InvalidArgument("grid search needs at least one grid point");
  const auto start = std::chrono::steady_clock::now();
  std::vector<Trial> trials;
  trials.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) trials.push_back(objective(grid[i], i));
  return detail::finish("grid", std::move(trials), start);
}

inline TuneResult grid_search(const ObjectiveContext& ctx, const std::vector<ParamAssignment>& grid) {
  auto r = grid_search(grid, context_objective(ctx));
  r.search_plan = ctx.fold_plan();
  return r;
}

template <TrialFunction F>
TuneResult random_search(const SearchSpace& space, F&& objective, std::size_t n_trials,
                         std::uint64_t seed) {
  if (n_trials < 1) throw InvalidArgument("random search needs at least one trial");
  const auto start = std::chrono::steady_clock::now();
  Rng rng(seed);
  std::vector<Trial> trials;
  trials.reserve(n_trials);
  for (std::size_t i = 0; i < n_trials; ++i) trials.push_back(objective(sample(space, rng), i));
  return detail::finish("random", std::move(trials), start);
}

inline TuneResult random_search(const ObjectiveContext& ctx, std::size_t n_trials,
                                std::uint64_t seed) {
  auto r = random_search(ctx.space(), context_objective(ctx), n_trials, seed);
  r.search_plan = ctx.fold_plan();
  return r;
}

// ---------------------------------------------------------------------------
// Tree-structured Parzen Estimator

namespace tpe {

// One-dimensional Parzen estimator over a dimension's support: a mixture of
// the dimension's prior and one component per observation.
class ParzenEstimator {
 public:
  virtual ~ParzenEstimator() = default;
  virtual ParamValue sample(Rng& rng) const = 0;
  virtual double log_density(const ParamValue& v) const = 0;
};

// Continuous dimensions, fitted in the sampling coordinate (log for
// LogUniform). Kernels on bounded dimensions are truncated to the bounds.
class ContinuousParzen final : public ParzenEstimator {
 public:
  ContinuousParzen(const Distribution& prior, const std::vector<double>& observed,
                   double bandwidth_floor, bool adaptive_floor = false)
      : prior_(prior) {
    if (const auto* u = std::get_if<Uniform>(&prior)) {
      lo_ = u->lo;
      hi_ = u->hi;
      bounded_ = true;
    } else if (const auto* lu = std::get_if<LogUniform>(&prior)) {
      lo_ = std::log(lu->lo);
      hi_ = std::log(lu->hi);
      bounded_ = true;
      log_scale_ = true;
    } else if (const auto* n = std::get_if<Normal>(&prior)) {
      scale_ = n->sigma;
    } else {
      throw InvalidArgument("continuous Parzen estimator needs a continuous prior");
    }
    if (bounded_) scale_ = hi_ - lo_;

    centers_.reserve(observed.size());
    for (double v : observed) centers_.push_back(to_internal(v));
    std::vector<double> sorted = centers_;
    std::sort(sorted.begin(), sorted.end());
    const double rel_floor =
        adaptive_floor ? std::max(bandwidth_floor,
                                  1.0 / std::min(100.0, static_cast<double>(observed.size()) + 1.0))
                       : bandwidth_floor;
    const double floor = rel_floor * scale_;
    for (double c : centers_) {
      double nearest = std::numeric_limits<double>::infinity();
      const auto it = std::lower_bound(sorted.begin(), sorted.end(), c);
      // `it` is c itself (or an equal value); neighbours sit on either side.
      const auto pos = static_cast<std::size_t>(it - sorted.begin());
      if (pos > 0) nearest = std::min(nearest, c - sorted[pos - 1]);
      if (pos + 1 < sorted.size()) nearest = std::min(nearest, sorted[pos + 1] - c);
      if (!std::isfinite(nearest)) nearest = scale_;
      const double bw = std::max(nearest, floor);
      widths_.push_back(bw);
      log_mass_.push_back(bounded_ ? std::log(std::max(
                                         detail::normal_interval(lo_, hi_, c, bw), 1e-300))
                                   : 0.0);
    }
  }

  ParamValue sample(Rng& rng) const override {
    const auto k = rng.below(centers_.size() + 1);
    if (k == centers_.size()) return rhpo::sample(prior_, rng);
    const double c = centers_[k];
    const double s = widths_[k];
    double z = c;
    if (bounded_) {
      bool accepted = false;
      for (int tries = 0; tries < 64 && !accepted; ++tries) {
        z = rng.normal(c, s);
        accepted = z >= lo_ && z <= hi_;
      }
      if (!accepted) z = std::clamp(z, lo_, hi_);
    } else {
      z = rng.normal(c, s);
    }
    return from_internal(z);
  }

  double log_density(const ParamValue& value) const override {
    const double v = std::get<double>(value);
    const double prior_log = rhpo::log_density(prior_, value);
    if (bounded_ && prior_log == kNegInf) return kNegInf;
    const double z = to_internal(v);
    // log-sum-exp over prior + kernels, all equally weighted
    std::vector<double> terms;
    terms.reserve(centers_.size() + 1);
    terms.push_back(prior_log + (log_scale_ ? std::log(v) : 0.0));
    for (std::size_t i = 0; i < centers_.size(); ++i) {
      const double u = (z - centers_[i]) / widths_[i];
      terms.push_back(-0.5 * u * u - std::log(widths_[i]) -
                      0.5 * std::log(2.0 * std::numbers::pi) - log_mass_[i]);
    }
    const double m = *std::max_element(terms.begin(), terms.end());
    double s = 0;
    for (double t : terms) s += std::exp(t - m);
    const double log_internal =
        m + std::log(s) - std::log(static_cast<double>(centers_.size() + 1));
    // back to the density of the original coordinate
    return log_scale_ ? log_internal - std::log(v) : log_internal;
  }

 // Kernel widths in the sampling coordinate, one per observation.
  const std::vector<double>& widths() const { return widths_; }

 private:
  double to_internal(double v) const { return log_scale_ ? std::log(v) : v; }
  ParamValue from_internal(double z) const {
    if (!log_scale_) return z;
    const auto& d = std::get<LogUniform>(prior_);
    return std::clamp(std::exp(z), d.lo, d.hi);
  }

  Distribution prior_;
  bool bounded_ = false;
  bool log_scale_ = false;
  double lo_ = 0, hi_ = 0, scale_ = 1;
  std::vector<double> centers_, widths_, log_mass_;
};

// Finite supports (Choice, QUniform, QLogUniform; QNormal restricted to
// mu +/- 5 sigma plus anything observed). Mass is add-one smoothed counts
// blended with the prior mass, the prior weighted like one observation.
class DiscreteParzen final : public ParzenEstimator {
 public:
  DiscreteParzen(const Distribution& prior, const std::vector<ParamValue>& observed) {
    support_ = support_points(prior, observed);
    std::vector<double> prior_mass(support_.size());
    double total_prior = 0;
    for (std::size_t i = 0; i < support_.size(); ++i) {
      prior_mass[i] = std::exp(rhpo::log_density(prior, support_[i]));
      total_prior += prior_mass[i];
    }
    std::vector<double> counts(support_.size(), 0.0);
    for (const auto& v : observed) {
      const auto i = index_of(v);
      if (i < support_.size()) counts[i] += 1.0;
    }
    const double n = static_cast<double>(observed.size());
    const double m = static_cast<double>(support_.size());
    prob_.resize(support_.size());
    for (std::size_t i = 0; i < support_.size(); ++i) {
      const double smoothed = (counts[i] + 1.0) / (n + m);
      const double p0 = total_prior > 0 ? prior_mass[i] / total_prior : 1.0 / m;
      prob_[i] = (n * smoothed + p0) / (n + 1.0);
    }
    cumulative_.resize(prob_.size());
    std::partial_sum(prob_.begin(), prob_.end(), cumulative_.begin());
  }

  ParamValue sample(Rng& rng) const override {
    const double u = rng.uniform() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return support_[static_cast<std::size_t>(it - cumulative_.begin())];
  }

  double log_density(const ParamValue& v) const override {
    const auto i = index_of(v);
    return i < support_.size() ? std::log(prob_[i]) : kNegInf;
  }

  const std::vector<ParamValue>& support() const { return support_; }
  const std::vector<double>& probabilities() const { return prob_; }

  static std::vector<ParamValue> support_points(const Distribution& prior,
                                                const std::vector<ParamValue>& observed) {
    if (const auto* c = std::get_if<Choice>(&prior))
      return {c->options.begin(), c->options.end()};
    if (const auto* qn = std::get_if<QNormal>(&prior)) {
      auto pts = detail::quantized_range(qn->mu - 5 * qn->sigma, qn->mu + 5 * qn->sigma, qn->q);
      for (const auto& v : observed) pts.push_back(quantize(std::get<double>(v), qn->q));
      std::sort(pts.begin(), pts.end());
      pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
      return {pts.begin(), pts.end()};
    }
    return dimension_values(prior, 1);
  }

 private:
  std::size_t index_of(const ParamValue& v) const {
    for (std::size_t i = 0; i < support_.size(); ++i) {
      if (v.index() != support_[i].index()) continue;
      if (const auto* s = std::get_if<std::string>(&v)) {
        if (*s == std::get<std::string>(support_[i])) return i;
      } else {
        const double a = std::get<double>(v), b = std::get<double>(support_[i]);
        if (std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)})) return i;
      }
    }
    return support_.size();
  }

  std::vector<ParamValue> support_;
  std::vector<double> prob_, cumulative_;
};

inline std::unique_ptr<ParzenEstimator> fit(const Distribution& prior,
                                            const std::vector<ParamValue>& observed,
                                            double bandwidth_floor,
                                            bool adaptive_floor = false) {
  if (is_choice(prior) || is_quantized(prior))
    return std::make_unique<DiscreteParzen>(prior, observed);
  std::vector<double> xs;
  xs.reserve(observed.size());
  for (const auto& v : observed) xs.push_back(std::get<double>(v));
  return std::make_unique<ContinuousParzen>(prior, xs, bandwidth_floor, adaptive_floor);
}

// History split into the best ceil(gamma * n) trials ("good") and the rest.
struct Split {
  std::vector<const Trial*> good;
  std::vector<const Trial*> bad;
};

inline Split split_history(const std::vector<Trial>& history, double gamma_quantile) {
  std::vector<const Trial*> order;
  order.reserve(history.size());
  for (const auto& t : history) order.push_back(&t);
  std::stable_sort(order.begin(), order.end(),
                   [](const Trial* a, const Trial* b) { return a->loss < b->loss; });
  const auto n_good = static_cast<std::size_t>(
      std::ceil(gamma_quantile * static_cast<double>(history.size())));
  Split s;
  s.good.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_good));
  s.bad.assign(order.begin() + static_cast<std::ptrdiff_t>(n_good), order.end());
  return s;
}

}  // namespace tpe

// Proposes the next assignment: fits l(x) to the good trials and g(x) to the
// rest, draws candidates from l and returns the one maximizing
// sum over dimensions of log l(x) - log g(x). With fewer than two trials
// there is nothing to split and the prior is sampled instead.
inline ParamAssignment tpe_suggest(const std::vector<Trial>& history, const SearchSpace& space,
                                   const TpeConfig& config, Rng& rng) {
  config.validate();
  if (history.size() < 2) return sample(space, rng);
  const auto split = tpe::split_history(history, config.gamma_quantile);
  if (split.good.empty() || split.bad.empty()) return sample(space, rng);

  struct Model {
    std::string name;
    std::unique_ptr<tpe::ParzenEstimator> good, bad;
  };
  std::vector<Model> models;
  for (const auto& [name, dist] : space.dimensions()) {
    std::vector<ParamValue> good_values, bad_values;
    for (const auto* t : split.good) good_values.push_back(t->params.at(name));
    for (const auto* t : split.bad) bad_values.push_back(t->params.at(name));
    models.push_back(
        {name, tpe::fit(dist, good_values, config.bandwidth_floor, config.adaptive_floor),
         tpe::fit(dist, bad_values, config.bandwidth_floor, config.adaptive_floor)});
  }

  ParamAssignment best;
  double best_score = -std::numeric_limits<double>::infinity();
  bool have_best = false;
  for (std::size_t c = 0; c < config.n_candidates; ++c) {
    ParamAssignment candidate;
    double score = 0;
    for (const auto& m : models) {
      auto v = m.good->sample(rng);
      score += m.good->log_density(v) - m.bad->log_density(v);
      candidate.set(m.name, std::move(v));
    }
    if (!have_best || score > best_score) {
      best = std::move(candidate);
      best_score = score;
      have_best = true;
    }
  }
  return best;
}

// Sequential model-based optimization: n_startup prior draws, then one TPE
// suggestion per trial, each conditioned on the full history so far.
template <TrialFunction F>
TuneResult smbo(const SearchSpace& space, F&& objective, const TpeConfig& config,
                std::uint64_t seed) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  Rng rng(seed);
  std::vector<Trial> trials;
  trials.reserve(config.n_trials);
  for (std::size_t i = 0; i < config.n_trials; ++i) {
    auto params = i < config.n_startup ? sample(space, rng) : tpe_suggest(trials, space, config, rng);
    trials.push_back(objective(params, i));
  }
  return detail::finish("tpe", std::move(trials), start);
}

inline TuneResult smbo(const ObjectiveContext& ctx, const TpeConfig& config, std::uint64_t seed) {
  auto r = smbo(ctx.space(), context_objective(ctx), config, seed);
  r.search_plan = ctx.fold_plan();
  return r;
}

// Randomized-Hyperopt against an existing full-data context: TPE runs on a
// stratified `rate` sample (with its own K folds over the sample only), and
// the winner is re-scored once on the full context's folds.
// elapsed_seconds covers sampling and search; the re-scoring is timed
// separately in full_data_seconds.
inline TuneResult randomized_hyperopt(const ObjectiveContext& full, double rate,
                                      const TpeConfig& config, std::uint64_t seed) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto& data = full.dataset();
  Rows sample_rows = stratified_sample(data, rate, seed);
  const auto sample_ctx = make_context(data, sample_rows, full.fold_plan().k, seed, full.space(),
                                       full.learner_defaults());
  auto result = smbo(sample_ctx.space(), context_objective(sample_ctx), config, seed);
  result.elapsed_seconds = seconds_since(start);
  result.method = "randomized";
  result.search_plan = sample_ctx.fold_plan();
  result.sample_rate = rate;
  result.sample_rows = std::move(sample_rows);

  const auto reeval_start = std::chrono::steady_clock::now();
  const auto check = evaluate(full, result.best_params, 0);
  result.full_data_mean_gini = check.mean_gini;
  result.full_data_seconds = seconds_since(reeval_start);
  result.full_data_plan = full.fold_plan();
  return result;
}

inline TuneResult randomized_hyperopt(const Dataset& data, double rate, const SearchSpace& space,
                                      const TpeConfig& config, std::size_t k, std::uint64_t seed,
                                      const GbtHyperParams& learner_defaults = {}) {
  if (!(rate > 0.0 && rate <= 1.0)) throw InvalidArgument("sampling rate must be in (0, 1]");
  const auto full = make_context(data, k, seed, space, learner_defaults);
  return randomized_hyperopt(full, rate, config, seed);
}

}  // namespace rhpo
