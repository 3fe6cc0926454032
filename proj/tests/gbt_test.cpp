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

#include <cmath>

#include "rhpo/gbt.hpp"
#include "rhpo/metrics.hpp"
#include "test_util.hpp"

namespace rhpo {
namespace {

std::vector<std::uint8_t> labels_of(const Dataset& d) {
  return {d.labels().begin(), d.labels().end()};
}

void check_splits(const Tree& t, const GbtHyperParams& p, std::size_t feature_count) {
  for (const auto& n : t.nodes) {
    if (n.is_leaf()) continue;
    EXPECT_GT(n.gain, p.min_split_gain);
    EXPECT_LT(static_cast<std::size_t>(n.feature), feature_count);
    EXPECT_GE(t.nodes[n.left].cover, p.min_child_weight);
    EXPECT_GE(t.nodes[n.right].cover, p.min_child_weight);
  }
  EXPECT_LE(t.depth(), p.max_depth);
}

TEST(GbtTest, NoRoundsPredictsBaseScore) {
  const auto d = testing::synthetic(50, 20, 3, 1.0, 1);
  GbtHyperParams p;
  p.n_rounds = 0;
  const auto m = train(d, p);
  EXPECT_TRUE(m.trees.empty());
  EXPECT_NEAR(m.base_score, std::log(20.0 / 30.0), 1e-12);
  const auto rows = d.all_rows();
  for (double v : predict_proba(m, d, rows)) EXPECT_DOUBLE_EQ(v, sigmoid(m.base_score));
}

TEST(GbtTest, OneStumpSeparates1D) {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 40; ++i) {
    x.push_back({static_cast<double>(i)});
    y.push_back(i >= 23 ? 1 : 0);
  }
  const auto d = make_dataset(x, y);
  GbtHyperParams p;
  p.n_rounds = 1;
  p.max_depth = 1;
  const auto m = train(d, p);
  ASSERT_EQ(m.trees.size(), 1u);
  ASSERT_EQ(m.trees[0].nodes.size(), 3u);
  EXPECT_DOUBLE_EQ(m.trees[0].nodes[0].threshold, 22.5);
  const auto rows = d.all_rows();
  EXPECT_EQ(roc_auc(predict_proba(m, d, rows), labels_of(d)), 1.0);
}

TEST(GbtTest, NewtonLeafWeight) {
  EXPECT_DOUBLE_EQ(newton_leaf_weight(4.0, 3.0, 1.0), -1.0);
  EXPECT_DOUBLE_EQ(split_gain(2, 1, -2, 1, 0), 0.5 * (4.0 + 4.0 - 0.0));
}

TEST(GbtTest, LeafOnlyTreeIsAdditive) {
  const auto d = testing::synthetic(30, 10, 2, 0.0, 3);
  GbtModel m;
  m.base_score = 0.25;
  m.feature_count = 2;
  Tree t;
  t.nodes.push_back(TreeNode{});
  t.nodes[0].weight = -0.75;
  m.trees.push_back(t);
  const auto rows = d.all_rows();
  for (double v : predict_proba(m, d, rows)) EXPECT_DOUBLE_EQ(v, sigmoid(-0.5));
}

TEST(GbtTest, MissingValuesFollowDefaultDirection) {
  // Feature 0 present for half the rows; missing rows are all positive, so
  // the learned default must send them with the positive side.
  std::vector<double> x;
  std::vector<std::uint8_t> mask, y;
  for (int i = 0; i < 60; ++i) {
    const bool miss = i % 3 == 0;
    const int label = miss ? 1 : (i % 2);
    x.push_back(label ? 5.0 + i * 0.01 : i * 0.01);
    mask.push_back(miss);
    y.push_back(static_cast<std::uint8_t>(label));
  }
  const Dataset d(x, mask, y, {"f"});
  GbtHyperParams p;
  p.n_rounds = 20;
  p.max_depth = 2;
  const auto m = train(d, p);
  const auto& root = m.trees[0].nodes[0];
  ASSERT_FALSE(root.is_leaf());
  EXPECT_FALSE(root.default_left);  // positives (>= 5) sit on the right
  const auto rows = d.all_rows();
  EXPECT_EQ(roc_auc(predict_margin(m, d, rows), labels_of(d)), 1.0);

  // an all-missing row still reaches a leaf
  const Dataset all_missing({0.0}, {1}, {1}, {"f"});
  const Rows one{0};
  const auto p1 = predict_proba(m, all_missing, one);
  EXPECT_GT(p1[0], 0.5);
  EXPECT_LT(p1[0], 1.0);
}

TEST(GbtTest, FeatureCountMismatch) {
  const auto d = testing::synthetic(40, 20, 3, 1.0, 1);
  const auto other = testing::synthetic(40, 20, 2, 1.0, 1);
  const auto m = train(d, GbtHyperParams{});
  const auto rows = other.all_rows();
  EXPECT_THROW(predict_proba(m, other, rows), InvalidArgument);
}

TEST(GbtTest, TrainErrors) {
  const auto d = testing::synthetic(40, 20, 3, 1.0, 1);
  EXPECT_THROW(train(d, Rows{}, GbtHyperParams{}), InvalidArgument);
  Rows negatives;
  for (auto r : d.all_rows())
    if (!d.label(r)) negatives.push_back(r);
  EXPECT_THROW(train(d, negatives, GbtHyperParams{}), InvalidArgument);
  GbtHyperParams bad;
  bad.eta = 0;
  EXPECT_THROW(train(d, bad), InvalidArgument);
  bad = {};
  bad.subsample = 1.5;
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = {};
  bad.max_depth = 0;
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = {};
  bad.l2_reg = -1;
  EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(GbtTest, DeterministicUnderSeed) {
  const auto d = testing::synthetic(400, 150, 6, 0.7, 9);
  GbtHyperParams p;
  p.n_rounds = 30;
  p.subsample = 0.7;
  p.colsample = 0.5;
  p.seed = 1234;
  const auto a = train(d, p);
  const auto b = train(d, p);
  EXPECT_EQ(a, b);
  const auto rows = d.all_rows();
  EXPECT_EQ(predict_proba(a, d, rows), predict_proba(b, d, rows));
  p.seed = 4321;
  EXPECT_NE(train(d, p), a);
}

TEST(GbtTest, SplitsRespectConstraints) {
  const auto d = testing::synthetic(600, 200, 5, 0.8, 4);
  GbtHyperParams p;
  p.n_rounds = 15;
  p.max_depth = 4;
  p.min_child_weight = 3;
  p.min_split_gain = 0.2;
  const auto m = train(d, p);
  for (const auto& t : m.trees) check_splits(t, p, d.n_features());
}

TEST(GbtTest, PredictionsStrictlyInsideUnitInterval) {
  const auto d = testing::separable(300, 2);
  GbtHyperParams p;
  p.n_rounds = 300;
  p.eta = 1.0;
  p.l2_reg = 0.0;
  p.min_child_weight = 0.0;
  const auto m = train(d, p);
  const auto rows = d.all_rows();
  for (double v : predict_proba(m, d, rows)) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(GbtTest, MonotoneTransformKeepsPartition) {
  const auto d = testing::synthetic(300, 120, 3, 1.0, 6);
  std::vector<double> x(d.features().begin(), d.features().end());
  for (std::size_t r = 0; r < d.n_rows(); ++r) x[r * 3 + 1] = std::exp(x[r * 3 + 1]);
  const Dataset t(x, {}, {d.labels().begin(), d.labels().end()}, d.feature_names());
  GbtHyperParams p;
  p.n_rounds = 5;
  p.max_depth = 3;
  const auto ma = train(d, p);
  const auto mb = train(t, p);
  ASSERT_EQ(ma.trees.size(), mb.trees.size());
  for (std::size_t k = 0; k < ma.trees.size(); ++k)
    for (auto r : d.all_rows())
      EXPECT_EQ(ma.trees[k].leaf_index(d, r), mb.trees[k].leaf_index(t, r));
}

TEST(GbtTest, TrainingLossNonIncreasingOnBanknote) {
  const auto d = testing::load_banknote();
  GbtHyperParams p;
  p.n_rounds = 100;
  p.eta = 0.1;
  const auto m = train(d, p);
  const auto rows = d.all_rows();
  double prev = log_loss(m.prefix(0), d, rows);
  for (std::size_t k = 1; k <= m.trees.size(); ++k) {
    const double cur = log_loss(m.prefix(k), d, rows);
    EXPECT_LE(cur, prev + 1e-9) << "round " << k;
    prev = cur;
  }
}

TEST(GbtTest, JsonDump) {
  const auto d = testing::synthetic(80, 30, 2, 1.5, 1);
  GbtHyperParams p;
  p.n_rounds = 2;
  p.max_depth = 2;
  const auto j = to_json(train(d, p));
  ASSERT_EQ(j["trees"].size(), 2u);
  const auto& root = j["trees"][0];
  ASSERT_TRUE(root.contains("feature"));
  EXPECT_TRUE(root["default"] == "left" || root["default"] == "right");
  EXPECT_TRUE(root["left"].contains("leaf") || root["left"].contains("feature"));
}

}  // namespace
}  // namespace rhpo
