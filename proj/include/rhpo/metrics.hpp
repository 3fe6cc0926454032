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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "rhpo/error.hpp"

namespace rhpo {

// Area under the ROC curve via the Mann-Whitney U statistic. Tied scores get
// their average rank, so a tied (pos, neg) pair counts one half.
template <typename Label>
double roc_auc(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size()) throw InvalidArgument("scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (double s : scores)
    if (std::isnan(s)) throw InvalidArgument("NaN score");
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    // Ranks i+1 .. j share their mean.
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]]) {
        positive_rank_sum += avg_rank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0)
    throw InvalidArgument("AUC is undefined when only one class is present");
  const double p = static_cast<double>(positives);
  const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

inline double roc_auc(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
  return roc_auc(std::span<const double>(scores), std::span<const std::uint8_t>(labels));
}

inline double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  return roc_auc(std::span<const double>(scores), std::span<const int>(labels));
}

// G = 2 * AUC - 1
inline double gini(double auc) {
  if (!(auc >= 0.0 && auc <= 1.0)) throw InvalidArgument("AUC must lie in [0, 1]");
  return 2.0 * auc - 1.0;
}

inline double mean_gini(std::span<const double> fold_ginis) {
  if (fold_ginis.empty()) throw InvalidArgument("mean Gini of an empty fold list");
  double s = 0.0;
  for (double g : fold_ginis) s += g;
  return s / static_cast<double>(fold_ginis.size());
}

inline double mean_gini(const std::vector<double>& fold_ginis) {
  return mean_gini(std::span<const double>(fold_ginis));
}

}  // namespace rhpo
