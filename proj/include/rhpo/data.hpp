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

// Binary-classification datasets: CSV ingestion with one-hot encoding and a
// missing-value mask, stratified K-fold splitting and stratified subsampling.

#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rhpo/error.hpp"
#include "rhpo/random.hpp"

namespace rhpo {

using RowIndex = std::size_t;
using Rows = std::vector<RowIndex>;

// Encoded numeric features (row-major) plus a parallel missing mask and
// {0,1} labels. Missing cells hold 0.0 in `features`; only the mask is
// authoritative.
class Dataset {
 public:
  Dataset() = default;

  Dataset(std::vector<double> features, std::vector<std::uint8_t> missing,
          std::vector<std::uint8_t> labels, std::vector<std::string> feature_names)
      : features_(std::move(features)),
        missing_(std::move(missing)),
        labels_(std::move(labels)),
        names_(std::move(feature_names)) {
    n_rows_ = labels_.size();
    n_features_ = names_.size();
    if (features_.size() != n_rows_ * n_features_)
      throw InvalidArgument("feature matrix size does not match rows x features");
    if (missing_.empty()) missing_.assign(features_.size(), 0);
    if (missing_.size() != features_.size())
      throw InvalidArgument("missing mask size does not match the feature matrix");
    for (auto y : labels_)
      if (y > 1) throw InvalidArgument("labels must be 0 or 1");
    for (std::size_t i = 0; i < features_.size(); ++i) {
      if (missing_[i])
        features_[i] = 0.0;
      else if (!std::isfinite(features_[i]))
        throw InvalidArgument("non-finite feature value must be flagged as missing");
    }
  }

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_features() const { return n_features_; }

  double value(RowIndex r, std::size_t f) const { return features_[r * n_features_ + f]; }
  bool is_missing(RowIndex r, std::size_t f) const { return missing_[r * n_features_ + f] != 0; }
  int label(RowIndex r) const { return labels_[r]; }

  std::span<const double> features() const { return features_; }
  std::span<const std::uint8_t> missing_mask() const { return missing_; }
  std::span<const std::uint8_t> labels() const { return labels_; }
  const std::vector<std::string>& feature_names() const { return names_; }

  Rows all_rows() const {
    Rows r(n_rows_);
    for (std::size_t i = 0; i < n_rows_; ++i) r[i] = i;
    return r;
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<double> features_;
  std::vector<std::uint8_t> missing_;
  std::vector<std::uint8_t> labels_;
  std::vector<std::string> names_;
  std::size_t n_rows_ = 0;
  std::size_t n_features_ = 0;
};

// Dense dataset without missing values; feature names default to f0, f1, ...
inline Dataset make_dataset(const std::vector<std::vector<double>>& rows,
                            const std::vector<int>& labels) {
  if (rows.size() != labels.size()) throw InvalidArgument("rows and labels differ in length");
  const std::size_t nf = rows.empty() ? 0 : rows.front().size();
  std::vector<double> x;
  x.reserve(rows.size() * nf);
  for (const auto& r : rows) {
    if (r.size() != nf) throw InvalidArgument("ragged feature rows");
    x.insert(x.end(), r.begin(), r.end());
  }
  std::vector<std::string> names;
  for (std::size_t f = 0; f < nf; ++f) names.push_back("f" + std::to_string(f));
  std::vector<std::uint8_t> y(labels.begin(), labels.end());
  for (int l : labels)
    if (l != 0 && l != 1) throw InvalidArgument("labels must be 0 or 1");
  return Dataset(std::move(x), {}, std::move(y), std::move(names));
}

// Indices of `rows` grouped by label: [0] negatives, [1] positives, each in
// the order given.
inline std::array<Rows, 2> split_by_class(const Dataset& data, std::span<const RowIndex> rows) {
  std::array<Rows, 2> out;
  for (auto r : rows) out[data.label(r)].push_back(r);
  return out;
}

// ---------------------------------------------------------------------------
// CSV

struct CsvOptions {
  std::string target;
  std::vector<std::string> categorical;
  std::vector<std::string> missing_tokens{"", "NA", "?"};
  // Target cells equal to this label map to 1, everything else to 0. When
  // unset the target must already be 0/1.
  std::optional<std::string> positive_label;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// RFC-4180 records; quoted fields may contain commas, newlines and "".
inline std::vector<std::vector<std::string>> parse_csv_records(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  auto end_field = [&] {
    record.push_back(field);
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    const bool blank = record.size() == 1 && trim(record[0]).empty();
    if (!blank) records.push_back(std::move(record));
    record.clear();
  };
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && trim(field).empty()) {
      field.clear();
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      end_record();
    } else if (c == '\r') {
      if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_record();
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw DataError("unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

inline std::optional<double> parse_number(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace detail

inline Dataset parse_csv(std::string_view text, const CsvOptions& opt) {
  auto records = detail::parse_csv_records(text);
  if (records.empty()) throw DataError("empty file: no header row");
  if (records.size() == 1) throw DataError("empty file: header has no data rows");

  std::vector<std::string> header;
  for (const auto& h : records[0]) header.emplace_back(detail::trim(h));
  const std::size_t n_cols = header.size();

  const auto target_it = std::find(header.begin(), header.end(), opt.target);
  if (target_it == header.end()) throw DataError("target column '" + opt.target + "' not found");
  const auto target_col = static_cast<std::size_t>(target_it - header.begin());

  std::vector<bool> is_cat(n_cols, false);
  for (const auto& c : opt.categorical) {
    const auto it = std::find(header.begin(), header.end(), c);
    if (it == header.end()) throw DataError("categorical column '" + c + "' not found");
    is_cat[static_cast<std::size_t>(it - header.begin())] = true;
  }
  const std::set<std::string, std::less<>> missing(opt.missing_tokens.begin(),
                                                   opt.missing_tokens.end());

  const std::size_t n_rows = records.size() - 1;
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != n_cols)
      throw DataError("row " + std::to_string(r + 1) + " has " + std::to_string(records[r].size()) +
                      " fields, header has " + std::to_string(n_cols));
  }
  auto cell = [&](std::size_t r, std::size_t c) { return detail::trim(records[r + 1][c]); };

  // Output layout: columns in file order, categoricals expanded in place.
  struct Column {
    std::size_t src;
    bool categorical;
    std::vector<std::string> levels;
  };
  std::vector<Column> columns;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < n_cols; ++c) {
    if (c == target_col) continue;
    Column col{c, bool(is_cat[c]), {}};
    if (col.categorical) {
      std::set<std::string> levels;
      for (std::size_t r = 0; r < n_rows; ++r) {
        const auto v = cell(r, c);
        if (!missing.contains(v)) levels.emplace(v);
      }
      col.levels.assign(levels.begin(), levels.end());
      for (const auto& l : col.levels) names.push_back(header[c] + "=" + l);
    } else {
      names.push_back(header[c]);
    }
    columns.push_back(std::move(col));
  }

  const std::size_t nf = names.size();
  std::vector<double> x(n_rows * nf, 0.0);
  std::vector<std::uint8_t> mask(n_rows * nf, 0);
  std::vector<std::uint8_t> y(n_rows, 0);

  for (std::size_t r = 0; r < n_rows; ++r) {
    std::size_t f = 0;
    for (const auto& col : columns) {
      const auto v = cell(r, col.src);
      const bool is_missing = missing.contains(v);
      if (col.categorical) {
        for (const auto& level : col.levels) {
          const std::size_t k = r * nf + f++;
          if (is_missing)
            mask[k] = 1;
          else
            x[k] = (v == level) ? 1.0 : 0.0;
        }
        continue;
      }
      const std::size_t k = r * nf + f++;
      if (is_missing) {
        mask[k] = 1;
      } else if (auto num = detail::parse_number(v)) {
        x[k] = *num;
      } else {
        throw DataError("row " + std::to_string(r + 2) + ", column '" + header[col.src] +
                        "': cannot parse '" + std::string(v) + "' as a number");
      }
    }

    const auto t = cell(r, target_col);
    if (missing.contains(t))
      throw DataError("row " + std::to_string(r + 2) + ": target value is missing");
    if (opt.positive_label) {
      y[r] = (t == *opt.positive_label) ? 1 : 0;
    } else {
      const auto num = detail::parse_number(t);
      if (!num || (*num != 0.0 && *num != 1.0))
        throw DataError("row " + std::to_string(r + 2) + ": target '" + std::string(t) +
                        "' is not 0/1; declare the positive label");
      y[r] = *num == 1.0 ? 1 : 0;
    }
  }

  const auto positives = std::count(y.begin(), y.end(), std::uint8_t{1});
  if (positives == 0 || positives == static_cast<std::ptrdiff_t>(n_rows))
    throw DataError("target column '" + opt.target + "' has a single class");

  return Dataset(std::move(x), std::move(mask), std::move(y), std::move(names));
}

inline Dataset load_csv(const std::string& path, const CsvOptions& opt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), opt);
}

// ---------------------------------------------------------------------------
// Stratified splitting

struct Fold {
  Rows train;
  Rows test;
  friend bool operator==(const Fold&, const Fold&) = default;
};

struct FoldPlan {
  std::vector<Fold> folds;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  friend bool operator==(const FoldPlan&, const FoldPlan&) = default;
};

// Stratified K-fold over `rows`. Within each class the rows are shuffled by
// `seed` and dealt round-robin; the deal continues across classes so fold
// sizes also stay balanced.
inline FoldPlan stratified_kfold(const Dataset& data, std::span<const RowIndex> rows,
                                 std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("K must be >= 2");
  auto by_class = split_by_class(data, rows);
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].size() < k)
      throw StratificationError("class " + std::to_string(c) + " has " +
                                std::to_string(by_class[c].size()) + " rows, fewer than K=" +
                                std::to_string(k));
  }
  Rng rng(seed);
  FoldPlan plan{std::vector<Fold>(k), k, seed};
  std::size_t next = 0;
  for (auto& members : by_class) {
    rng.shuffle(std::span<RowIndex>(members));
    for (auto r : members) {
      plan.folds[next].test.push_back(r);
      next = (next + 1) % k;
    }
  }
  Rows all(rows.begin(), rows.end());
  std::sort(all.begin(), all.end());
  for (auto& fold : plan.folds) {
    std::sort(fold.test.begin(), fold.test.end());
    std::set_difference(all.begin(), all.end(), fold.test.begin(), fold.test.end(),
                        std::back_inserter(fold.train));
  }
  return plan;
}

inline FoldPlan stratified_kfold(const Dataset& data, std::size_t k, std::uint64_t seed) {
  const auto rows = data.all_rows();
  return stratified_kfold(data, rows, k, seed);
}

// Rows kept per class by stratified_sample.
inline std::size_t stratified_sample_count(std::size_t class_size, double rate) {
  const auto m = static_cast<std::size_t>(std::llround(rate * static_cast<double>(class_size)));
  return std::clamp<std::size_t>(m, 1, class_size);
}

// Per class, max(1, round(rate * |c|)) rows drawn without replacement.
// Returned indices are sorted ascending.
inline Rows stratified_sample(const Dataset& data, double rate, std::uint64_t seed) {
  if (!(rate > 0.0 && rate <= 1.0)) throw InvalidArgument("sampling rate must be in (0, 1]");
  const auto rows = data.all_rows();
  auto by_class = split_by_class(data, rows);
  if (by_class[0].empty() || by_class[1].empty())
    throw DataError("stratified sampling needs both classes present");
  Rng rng(seed);
  Rows out;
  for (auto& members : by_class) {
    const auto m = stratified_sample_count(members.size(), rate);
    rng.shuffle(std::span<RowIndex>(members));
    out.insert(out.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(m));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace rhpo
