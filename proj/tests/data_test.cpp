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

#include <algorithm>
#include <numeric>

#include "rhpo/data.hpp"
#include "test_util.hpp"

namespace rhpo {
namespace {

Dataset with_counts(std::size_t pos, std::size_t neg, std::uint64_t seed = 1) {
  return testing::synthetic(pos + neg, pos, 2, 1.0, seed);
}

std::size_t positives_in(const Dataset& d, const Rows& rows) {
  std::size_t n = 0;
  for (auto r : rows) n += d.label(r);
  return n;
}

void expect_valid_plan(const Dataset& d, const Rows& rows, const FoldPlan& plan) {
  Rows seen;
  std::vector<std::size_t> pos, neg;
  for (const auto& f : plan.folds) {
    seen.insert(seen.end(), f.test.begin(), f.test.end());
    const auto p = positives_in(d, f.test);
    pos.push_back(p);
    neg.push_back(f.test.size() - p);
    ASSERT_EQ(f.train.size() + f.test.size(), rows.size());
    for (auto r : f.test) ASSERT_FALSE(std::binary_search(f.train.begin(), f.train.end(), r));
  }
  std::sort(seen.begin(), seen.end());
  Rows expected = rows;
  std::sort(expected.begin(), expected.end());
  ASSERT_EQ(seen, expected);
  EXPECT_LE(*std::max_element(pos.begin(), pos.end()) - *std::min_element(pos.begin(), pos.end()), 1u);
  EXPECT_LE(*std::max_element(neg.begin(), neg.end()) - *std::min_element(neg.begin(), neg.end()), 1u);
}

TEST(CsvTest, NumericAndTarget) {
  CsvOptions opt;
  opt.target = "y";
  const auto d = parse_csv("a,b,y\n1.5,2,1\n-3,4e2,0\n", opt);
  ASSERT_EQ(d.n_rows(), 2u);
  ASSERT_EQ(d.n_features(), 2u);
  EXPECT_EQ(d.value(1, 1), 400.0);
  EXPECT_EQ(d.label(0), 1);
  EXPECT_EQ(d.label(1), 0);
  EXPECT_EQ(d.feature_names(), (std::vector<std::string>{"a", "b"}));
}

TEST(CsvTest, OneHotArity) {
  CsvOptions opt;
  opt.target = "y";
  opt.categorical = {"colour"};
  const auto d = parse_csv("x,colour,y\n1,red,1\n2,green,0\n3,blue,1\n4,red,0\n", opt);
  ASSERT_EQ(d.n_features(), 4u);
  EXPECT_EQ(d.feature_names(),
            (std::vector<std::string>{"x", "colour=blue", "colour=green", "colour=red"}));
  EXPECT_EQ(d.value(0, 3), 1.0);
  EXPECT_EQ(d.value(0, 1), 0.0);
  EXPECT_EQ(d.value(2, 1), 1.0);
}

TEST(CsvTest, MissingTokensSetMask) {
  CsvOptions opt;
  opt.target = "y";
  opt.categorical = {"c"};
  opt.missing_tokens = {"?", "unknown"};
  const auto d = parse_csv("x,c,y\n?,a,1\n2,unknown,0\n3,b,0\n", opt);
  EXPECT_TRUE(d.is_missing(0, 0));
  EXPECT_FALSE(d.is_missing(1, 0));
  EXPECT_TRUE(d.is_missing(1, 1));
  EXPECT_TRUE(d.is_missing(1, 2));
  EXPECT_FALSE(d.is_missing(2, 1));
}

TEST(CsvTest, PositiveLabelAndQuoting) {
  CsvOptions opt;
  opt.target = "outcome";
  opt.positive_label = ">50K";
  const auto d = parse_csv("\"a, b\",outcome\r\n1,\">50K\"\r\n2,<=50K\r\n3, >50K\r\n", opt);
  EXPECT_EQ(d.feature_names()[0], "a, b");
  EXPECT_EQ(d.label(0), 1);
  EXPECT_EQ(d.label(1), 0);
  EXPECT_EQ(d.label(2), 1);
}

TEST(CsvTest, Errors) {
  CsvOptions opt;
  opt.target = "y";
  EXPECT_THROW(parse_csv("", opt), DataError);
  EXPECT_THROW(parse_csv("a,y\n", opt), DataError);
  EXPECT_THROW(parse_csv("a,b\n1,1\n2,0\n", opt), DataError);      // no target column
  EXPECT_THROW(parse_csv("a,y\nxyz,1\n2,0\n", opt), DataError);    // unparseable cell
  EXPECT_THROW(parse_csv("a,y\n1,1\n2,1\n", opt), DataError);      // single class
  EXPECT_THROW(parse_csv("a,y\n1,yes\n2,no\n", opt), DataError);   // needs positive label
  EXPECT_THROW(parse_csv("a,y\n1,1,3\n2,0\n", opt), DataError);    // ragged
  EXPECT_THROW(load_csv("/nonexistent/file.csv", opt), DataError);
}

TEST(CsvTest, BundledBanknoteShape) {
  const auto d = testing::load_banknote();
  EXPECT_EQ(d.n_rows(), 1372u);
  EXPECT_EQ(d.n_features(), 4u);
}

TEST(CsvTest, ReencodingIsBitIdentical) {
  const auto a = testing::load_transfusion();
  const auto b = testing::load_transfusion();
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.n_rows(), 748u);
}

TEST(KFoldTest, ExactDivisibility) {
  const auto d = with_counts(6, 3);
  const auto plan = stratified_kfold(d, 3, 5);
  ASSERT_EQ(plan.folds.size(), 3u);
  for (const auto& f : plan.folds) {
    EXPECT_EQ(positives_in(d, f.test), 2u);
    EXPECT_EQ(f.test.size(), 3u);
  }
}

TEST(KFoldTest, RemainderSpread) {
  const auto d = with_counts(7, 3);
  const auto plan = stratified_kfold(d, 3, 5);
  std::vector<std::size_t> pos;
  for (const auto& f : plan.folds) pos.push_back(positives_in(d, f.test));
  std::sort(pos.begin(), pos.end());
  EXPECT_EQ(pos, (std::vector<std::size_t>{2, 2, 3}));
}

TEST(KFoldTest, Deterministic) {
  const auto d = with_counts(40, 25);
  EXPECT_EQ(stratified_kfold(d, 3, 9), stratified_kfold(d, 3, 9));
  EXPECT_NE(stratified_kfold(d, 3, 9), stratified_kfold(d, 3, 10));
}

TEST(KFoldTest, InfeasibleAndBadK) {
  const auto d = with_counts(10, 2);
  EXPECT_THROW(stratified_kfold(d, 3, 1), StratificationError);
  EXPECT_THROW(stratified_kfold(d, 1, 1), InvalidArgument);
}

TEST(KFoldTest, SubsetPlansStayInSubset) {
  const auto d = with_counts(300, 700);
  const auto sample = stratified_sample(d, 0.25, 3);
  const auto plan = stratified_kfold(d, sample, 3, 3);
  expect_valid_plan(d, sample, plan);
}

TEST(KFoldTest, RandomizedPartitionProperty) {
  Rng meta(2024);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 10 + meta.below(4990);
    const double ratio = 0.05 + 0.9 * meta.uniform();
    const auto pos = std::clamp<std::size_t>(static_cast<std::size_t>(ratio * n), 5, n - 5);
    const auto d = with_counts(pos, n - pos, meta.next());
    const std::size_t k = 2 + meta.below(4);
    expect_valid_plan(d, d.all_rows(), stratified_kfold(d, k, meta.next()));
  }
}

TEST(SampleTest, ExactProportions) {
  const auto d = with_counts(60, 40);
  const auto s = stratified_sample(d, 0.5, 1);
  EXPECT_EQ(s.size(), 50u);
  EXPECT_EQ(positives_in(d, s), 30u);
  EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
}

TEST(SampleTest, FullRateIsIdentity) {
  const auto d = with_counts(13, 8);
  EXPECT_EQ(stratified_sample(d, 1.0, 4), d.all_rows());
}

TEST(SampleTest, PerClassFloor) {
  // round(0.2 * 9) = 2 positives; round(0.2 * 1) = 0 -> floored to 1 negative
  const auto d = with_counts(9, 1);
  const auto s = stratified_sample(d, 0.2, 1);
  EXPECT_EQ(positives_in(d, s), 2u);
  EXPECT_EQ(s.size() - positives_in(d, s), 1u);
}

TEST(SampleTest, RateValidationAndDeterminism) {
  const auto d = with_counts(30, 30);
  EXPECT_THROW(stratified_sample(d, 0.0, 1), InvalidArgument);
  EXPECT_THROW(stratified_sample(d, 1.5, 1), InvalidArgument);
  EXPECT_THROW(stratified_sample(d, -0.1, 1), InvalidArgument);
  EXPECT_EQ(stratified_sample(d, 0.3, 8), stratified_sample(d, 0.3, 8));
}

TEST(SampleTest, PerClassCountsForPaperRates) {
  Rng meta(77);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 20 + meta.below(3000);
    const auto pos = 1 + meta.below(n - 1);
    const auto d = with_counts(pos, n - pos, meta.next());
    for (double rate : {0.1, 0.2, 0.25, 0.5}) {
      const auto s = stratified_sample(d, rate, meta.next());
      const auto p = positives_in(d, s);
      EXPECT_EQ(p, std::max<std::size_t>(1, std::llround(rate * pos)));
      EXPECT_EQ(s.size() - p, std::max<std::size_t>(1, std::llround(rate * (n - pos))));
    }
  }
}

}  // namespace
}  // namespace rhpo
