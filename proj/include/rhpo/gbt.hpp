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

// Second-order gradient-boosted decision trees for binary classification
// (logistic loss, exact greedy splits, learned default directions for
// missing values).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rhpo/data.hpp"
#include "rhpo/error.hpp"
#include "rhpo/random.hpp"

namespace rhpo {

struct GbtHyperParams {
  double eta = 0.3;
  std::size_t n_rounds = 100;
  std::size_t max_depth = 6;
  double min_child_weight = 1.0;
  double min_split_gain = 0.0;
  double l2_reg = 1.0;
  double subsample = 1.0;
  double colsample = 1.0;
  // Prior log-odds; unset means log-odds of the training positive rate.
  std::optional<double> base_score;
  std::uint64_t seed = 0;

  void validate() const {
    auto require = [](bool ok, const char* what) {
      if (!ok) throw InvalidArgument(what);
    };
    require(eta > 0.0 && eta <= 1.0, "eta must be in (0, 1]");
    require(max_depth >= 1, "max_depth must be >= 1");
    require(min_child_weight >= 0.0 && std::isfinite(min_child_weight), "min_child_weight must be >= 0");
    require(min_split_gain >= 0.0 && std::isfinite(min_split_gain), "min_split_gain must be >= 0");
    require(l2_reg >= 0.0 && std::isfinite(l2_reg), "l2_reg must be >= 0");
    require(subsample > 0.0 && subsample <= 1.0, "subsample must be in (0, 1]");
    require(colsample > 0.0 && colsample <= 1.0, "colsample must be in (0, 1]");
    require(!base_score || std::isfinite(*base_score), "base_score must be finite");
  }
};

struct TreeNode {
  static constexpr std::int32_t kLeaf = -1;

  std::int32_t feature = kLeaf;
  double threshold = 0.0;  // value < threshold goes left
  bool default_left = false;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double weight = 0.0;  // leaf output, already scaled by eta
  double gain = 0.0;
  double cover = 0.0;  // hessian sum of the training rows that reached the node

  bool is_leaf() const { return feature == kLeaf; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

// Nodes are stored flat; node 0 is the root.
class Tree {
 public:
  std::vector<TreeNode> nodes;

  double predict(const Dataset& data, RowIndex row) const {
    std::int32_t i = 0;
    for (;;) {
      const auto& n = nodes[static_cast<std::size_t>(i)];
      if (n.is_leaf()) return n.weight;
      const auto f = static_cast<std::size_t>(n.feature);
      const bool go_left =
          data.is_missing(row, f) ? n.default_left : data.value(row, f) < n.threshold;
      i = go_left ? n.left : n.right;
    }
  }

  // Index of the leaf `row` lands in.
  std::int32_t leaf_index(const Dataset& data, RowIndex row) const {
    std::int32_t i = 0;
    while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
      const auto& n = nodes[static_cast<std::size_t>(i)];
      const auto f = static_cast<std::size_t>(n.feature);
      const bool go_left =
          data.is_missing(row, f) ? n.default_left : data.value(row, f) < n.threshold;
      i = go_left ? n.left : n.right;
    }
    return i;
  }

  std::size_t depth() const { return depth_from(0); }

  friend bool operator==(const Tree&, const Tree&) = default;

 private:
  std::size_t depth_from(std::int32_t i) const {
    const auto& n = nodes[static_cast<std::size_t>(i)];
    if (n.is_leaf()) return 0;
    return 1 + std::max(depth_from(n.left), depth_from(n.right));
  }
};

struct GbtModel {
  double base_score = 0.0;
  std::vector<Tree> trees;
  std::size_t feature_count = 0;

  // The model made of the first `k` trees.
  GbtModel prefix(std::size_t k) const {
    GbtModel m{base_score, {}, feature_count};
    m.trees.assign(trees.begin(), trees.begin() + static_cast<std::ptrdiff_t>(std::min(k, trees.size())));
    return m;
  }

  friend bool operator==(const GbtModel&, const GbtModel&) = default;
};

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Unscaled optimal leaf output -G / (H + lambda).
inline double newton_leaf_weight(double g, double h, double l2_reg) {
  const double denom = h + l2_reg;
  return denom > 0 ? -g / denom : 0.0;
}

// Loss reduction of splitting a node into (left, right).
inline double split_gain(double gl, double hl, double gr, double hr, double l2_reg) {
  auto score = [&](double g, double h) { return h + l2_reg > 0 ? g * g / (h + l2_reg) : 0.0; };
  return 0.5 * (score(gl, hl) + score(gr, hr) - score(gl + gr, hl + hr));
}

namespace detail {

using Local = std::uint32_t;

struct SplitCandidate {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  bool default_left = false;
  double gain = 0.0;
  double g_left = 0.0, h_left = 0.0;
};

// Exact greedy tree growth over the rows of one boosting round.
class TreeGrower {
 public:
  TreeGrower(const Dataset& data, std::span<const RowIndex> rows, const GbtHyperParams& p,
             const std::vector<double>& grad, const std::vector<double>& hess)
      : goes_left_(rows.size(), 0), data_(data), rows_(rows), p_(p), grad_(grad), hess_(hess) {}

  // `sorted[k]` lists the in-bag local rows with a present value for
  // features[k], ascending by value.
  Tree grow(std::vector<Local> node_rows, const std::vector<std::size_t>& features,
            std::vector<std::vector<Local>> sorted) {
    features_ = &features;
    tree_.nodes.clear();
    double g = 0, h = 0;
    for (auto i : node_rows) {
      g += grad_[i];
      h += hess_[i];
    }
    build(std::move(node_rows), std::move(sorted), g, h, 0);
    return std::move(tree_);
  }

 private:
  double x(Local i, std::size_t f) const { return data_.value(rows_[i], f); }
  bool missing(Local i, std::size_t f) const { return data_.is_missing(rows_[i], f); }

  double leaf_weight(double g, double h) const { return newton_leaf_weight(g, h, p_.l2_reg) * p_.eta; }

  double score(double g, double h) const {
    const double denom = h + p_.l2_reg;
    return denom > 0 ? g * g / denom : 0.0;
  }

  SplitCandidate best_split(const std::vector<Local>& node_rows,
                            const std::vector<std::vector<Local>>& sorted, double g,
                            double h) const {
    SplitCandidate best;
    const double parent = score(g, h);
    for (std::size_t k = 0; k < features_->size(); ++k) {
      const std::size_t f = (*features_)[k];
      const auto& list = sorted[k];
      if (list.size() < 2) continue;
      double g_present = 0, h_present = 0;
      for (auto i : list) {
        g_present += grad_[i];
        h_present += hess_[i];
      }
      const bool has_missing = list.size() < node_rows.size();
      const double g_miss = g - g_present;
      const double h_miss = h - h_present;

      double gl = 0, hl = 0;
      for (std::size_t j = 0; j + 1 < list.size(); ++j) {
        gl += grad_[list[j]];
        hl += hess_[list[j]];
        const double a = x(list[j], f);
        const double b = x(list[j + 1], f);
        if (!(a < b)) continue;
        double thr = a + (b - a) / 2;
        if (!(thr > a)) thr = b;

        auto consider = [&](double gleft, double hleft, bool default_left) {
          const double gright = g - gleft;
          const double hright = h - hleft;
          if (hleft < p_.min_child_weight || hright < p_.min_child_weight) return;
          const double gain = 0.5 * (score(gleft, hleft) + score(gright, hright) - parent);
          if (!(gain > p_.min_split_gain)) return;
          if (!best.found || gain > best.gain) {
            best = {true, f, thr, default_left, gain, gleft, hleft};
          }
        };
        if (has_missing) {
          consider(gl, hl, false);
          consider(gl + g_miss, hl + h_miss, true);
        } else {
          // No missing rows here: unseen missing values follow the heavier child.
          consider(gl, hl, hl > h - hl);
        }
      }
    }
    return best;
  }

  std::int32_t build(std::vector<Local> node_rows, std::vector<std::vector<Local>> sorted,
                     double g, double h, std::size_t depth) {
    const auto id = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.push_back({});
    tree_.nodes.back().cover = h;

    SplitCandidate split;
    if (depth < p_.max_depth && node_rows.size() >= 2) split = best_split(node_rows, sorted, g, h);
    if (!split.found) {
      tree_.nodes[static_cast<std::size_t>(id)].weight = leaf_weight(g, h);
      return id;
    }

    // Route each row of this node.
    for (auto i : node_rows)
      goes_left_[i] = missing(i, split.feature) ? split.default_left
                                                : x(i, split.feature) < split.threshold;

    std::vector<Local> left_rows, right_rows;
    for (auto i : node_rows) (goes_left_[i] ? left_rows : right_rows).push_back(i);
    std::vector<std::vector<Local>> left_sorted(sorted.size()), right_sorted(sorted.size());
    for (std::size_t k = 0; k < sorted.size(); ++k) {
      for (auto i : sorted[k]) (goes_left_[i] ? left_sorted[k] : right_sorted[k]).push_back(i);
    }
    sorted.clear();
    node_rows.clear();

    const double gl = split.g_left, hl = split.h_left;
    const auto l = build(std::move(left_rows), std::move(left_sorted), gl, hl, depth + 1);
    const auto r = build(std::move(right_rows), std::move(right_sorted), g - gl, h - hl, depth + 1);
    auto& n = tree_.nodes[static_cast<std::size_t>(id)];
    n.feature = static_cast<std::int32_t>(split.feature);
    n.threshold = split.threshold;
    n.default_left = split.default_left;
    n.gain = split.gain;
    n.left = l;
    n.right = r;
    return id;
  }

 private:
  std::vector<char> goes_left_;
  const Dataset& data_;
  std::span<const RowIndex> rows_;
  const GbtHyperParams& p_;
  const std::vector<double>& grad_;
  const std::vector<double>& hess_;
  const std::vector<std::size_t>* features_ = nullptr;
  Tree tree_;
};

}  // namespace detail

// Fits n_rounds trees on `rows` of `data`. Deterministic given params.seed.
inline GbtModel train(const Dataset& data, std::span<const RowIndex> rows,
                      const GbtHyperParams& params) {
  using detail::Local;
  params.validate();
  if (rows.empty()) throw InvalidArgument("cannot train on an empty row subset");
  const std::size_t n = rows.size();
  const std::size_t nf = data.n_features();

  std::vector<double> y(n);
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i] >= data.n_rows()) throw InvalidArgument("row index out of range");
    y[i] = data.label(rows[i]);
    positives += data.label(rows[i]);
  }
  if (positives == 0 || positives == n)
    throw InvalidArgument("training subset must contain both classes");

  GbtModel model;
  model.feature_count = nf;
  const double rate = static_cast<double>(positives) / static_cast<double>(n);
  model.base_score = params.base_score.value_or(std::log(rate / (1.0 - rate)));
  if (params.n_rounds == 0 || nf == 0) return model;

  // Present rows per feature, sorted by value once; ties keep row order.
  std::vector<std::vector<Local>> presorted(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    auto& list = presorted[f];
    for (std::size_t i = 0; i < n; ++i)
      if (!data.is_missing(rows[i], f)) list.push_back(static_cast<Local>(i));
    std::stable_sort(list.begin(), list.end(), [&](Local a, Local b) {
      return data.value(rows[a], f) < data.value(rows[b], f);
    });
  }

  Rng rng(params.seed);
  std::vector<double> margin(n, model.base_score), grad(n), hess(n);
  std::vector<Local> all(n);
  std::iota(all.begin(), all.end(), Local{0});
  std::vector<std::size_t> all_features(nf);
  std::iota(all_features.begin(), all_features.end(), std::size_t{0});
  std::vector<char> in_bag(n, 1);

  detail::TreeGrower grower(data, rows, params, grad, hess);

  const std::size_t bag_size = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(params.subsample * static_cast<double>(n))), 1, n);
  const std::size_t col_count = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(params.colsample * static_cast<double>(nf))), 1, nf);

  model.trees.reserve(params.n_rounds);
  for (std::size_t round = 0; round < params.n_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(margin[i]);
      grad[i] = p - y[i];
      hess[i] = std::max(p * (1.0 - p), 1e-16);
    }

    std::vector<Local> bag;
    if (bag_size < n) {
      auto perm = all;
      rng.shuffle(std::span<Local>(perm));
      bag.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(bag_size));
      std::sort(bag.begin(), bag.end());
      std::fill(in_bag.begin(), in_bag.end(), 0);
      for (auto i : bag) in_bag[i] = 1;
    } else {
      bag = all;
    }

    std::vector<std::size_t> features;
    if (col_count < nf) {
      auto perm = all_features;
      rng.shuffle(std::span<std::size_t>(perm));
      features.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(col_count));
      std::sort(features.begin(), features.end());
    } else {
      features = all_features;
    }

    std::vector<std::vector<Local>> sorted(features.size());
    for (std::size_t k = 0; k < features.size(); ++k) {
      const auto& src = presorted[features[k]];
      if (bag_size < n) {
        sorted[k].reserve(src.size());
        for (auto i : src)
          if (in_bag[i]) sorted[k].push_back(i);
      } else {
        sorted[k] = src;
      }
    }

    Tree tree = grower.grow(std::move(bag), features, std::move(sorted));
    for (std::size_t i = 0; i < n; ++i) margin[i] += tree.predict(data, rows[i]);
    model.trees.push_back(std::move(tree));
  }
  return model;
}

inline GbtModel train(const Dataset& data, const GbtHyperParams& params) {
  const auto rows = data.all_rows();
  return train(data, rows, params);
}

// Raw log-odds: base_score plus the sum of tree outputs.
inline std::vector<double> predict_margin(const GbtModel& model, const Dataset& data,
                                          std::span<const RowIndex> rows) {
  if (data.n_features() != model.feature_count)
    throw InvalidArgument("dataset has " + std::to_string(data.n_features()) +
                          " features, model expects " + std::to_string(model.feature_count));
  std::vector<double> out(rows.size(), model.base_score);
  for (const auto& tree : model.trees)
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] += tree.predict(data, rows[i]);
  return out;
}

// Probabilities, kept strictly inside (0, 1) even when the margin saturates.
inline std::vector<double> predict_proba(const GbtModel& model, const Dataset& data,
                                         std::span<const RowIndex> rows) {
  auto out = predict_margin(model, data, rows);
  constexpr double lo = std::numeric_limits<double>::denorm_min();
  const double hi = std::nextafter(1.0, 0.0);
  for (auto& z : out) z = std::clamp(sigmoid(z), lo, hi);
  return out;
}

inline double log_loss(const GbtModel& model, const Dataset& data,
                       std::span<const RowIndex> rows) {
  const auto margin = predict_margin(model, data, rows);
  double s = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double z = margin[i];
    // log(1 + exp(-z)) for y = 1, log(1 + exp(z)) for y = 0
    const double t = data.label(rows[i]) ? -z : z;
    s += t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
  }
  return s / static_cast<double>(rows.size());
}

namespace detail {

inline nlohmann::ordered_json node_json(const Tree& tree, std::int32_t i) {
  const auto& n = tree.nodes[static_cast<std::size_t>(i)];
  nlohmann::ordered_json j;
  if (n.is_leaf()) {
    j["leaf"] = n.weight;
    j["cover"] = n.cover;
    return j;
  }
  j["feature"] = n.feature;
  j["threshold"] = n.threshold;
  j["default"] = n.default_left ? "left" : "right";
  j["gain"] = n.gain;
  j["cover"] = n.cover;
  j["left"] = node_json(tree, n.left);
  j["right"] = node_json(tree, n.right);
  return j;
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const GbtModel& model) {
  nlohmann::ordered_json j;
  j["base_score"] = model.base_score;
  j["feature_count"] = model.feature_count;
  j["trees"] = nlohmann::ordered_json::array();
  for (const auto& t : model.trees) j["trees"].push_back(detail::node_json(t, 0));
  return j;
}

}  // namespace rhpo
