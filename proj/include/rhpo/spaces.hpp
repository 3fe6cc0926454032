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

// Hyperparameter search spaces: sampling distributions, grid enumeration and
// densities over flat (non-conditional) spaces.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "rhpo/error.hpp"
#include "rhpo/random.hpp"

namespace rhpo {

struct Uniform {
  double lo;
  double hi;
};
struct LogUniform {
  double lo;
  double hi;
};
struct QUniform {
  double lo;
  double hi;
  double q;
};
struct QLogUniform {
  double lo;
  double hi;
  double q;
};
struct Normal {
  double mu;
  double sigma;
};
struct QNormal {
  double mu;
  double sigma;
  double q;
};
struct Choice {
  std::vector<std::string> options;
};

using Distribution =
    std::variant<Uniform, LogUniform, QUniform, QLogUniform, Normal, QNormal, Choice>;

// A hyperparameter value: real for numeric distributions, label for Choice.
using ParamValue = std::variant<double, std::string>;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double quantize(double x, double q) { return std::round(x / q) * q; }

inline bool is_quantized(const Distribution& d) {
  return std::holds_alternative<QUniform>(d) || std::holds_alternative<QLogUniform>(d) ||
         std::holds_alternative<QNormal>(d);
}

inline bool is_choice(const Distribution& d) { return std::holds_alternative<Choice>(d); }

inline std::string_view dist_name(const Distribution& d) {
  static constexpr std::string_view kNames[] = {"uniform", "loguniform", "quniform",
                                                "qloguniform", "normal", "qnormal",
                                                "choice"};
  return kNames[d.index()];
}

// Throws InvalidArgument when the distribution parameters are not legal.
inline void validate(const Distribution& dist) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InvalidArgument(what);
  };
  auto bounded = [&](double lo, double hi) {
    require(std::isfinite(lo) && std::isfinite(hi), "bounds must be finite");
    require(lo < hi, "lo must be < hi");
  };
  std::visit(Overloaded{
                 [&](const Uniform& d) { bounded(d.lo, d.hi); },
                 [&](const LogUniform& d) {
                   bounded(d.lo, d.hi);
                   require(d.lo > 0, "loguniform requires lo > 0");
                 },
                 [&](const QUniform& d) {
                   bounded(d.lo, d.hi);
                   require(d.q > 0 && std::isfinite(d.q), "q must be > 0");
                 },
                 [&](const QLogUniform& d) {
                   bounded(d.lo, d.hi);
                   require(d.lo > 0, "qloguniform requires lo > 0");
                   require(d.q > 0 && std::isfinite(d.q), "q must be > 0");
                 },
                 [&](const Normal& d) {
                   require(std::isfinite(d.mu), "mu must be finite");
                   require(d.sigma > 0 && std::isfinite(d.sigma), "sigma must be > 0");
                 },
                 [&](const QNormal& d) {
                   require(std::isfinite(d.mu), "mu must be finite");
                   require(d.sigma > 0 && std::isfinite(d.sigma), "sigma must be > 0");
                   require(d.q > 0 && std::isfinite(d.q), "q must be > 0");
                 },
                 [&](const Choice& d) {
                   require(!d.options.empty(), "choice requires at least one option");
                   std::set<std::string> seen(d.options.begin(), d.options.end());
                   require(seen.size() == d.options.size(), "choice options must be distinct");
                 },
             },
             dist);
}

// Named dimensions in declaration order. Immutable once built.
class SearchSpace {
 public:
  using Dimension = std::pair<std::string, Distribution>;

  SearchSpace() = default;
  explicit SearchSpace(std::vector<Dimension> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw InvalidArgument("search space needs at least one dimension");
    std::set<std::string> names;
    for (const auto& [name, dist] : dims_) {
      if (name.empty()) throw InvalidArgument("dimension names must be non-empty");
      if (!names.insert(name).second)
        throw InvalidArgument("duplicate dimension name '" + name + "'");
      try {
        validate(dist);
      } catch (const InvalidArgument& e) {
        throw InvalidArgument("dimension '" + name + "': " + e.what());
      }
    }
  }

  const std::vector<Dimension>& dimensions() const { return dims_; }
  std::size_t size() const { return dims_.size(); }
  bool empty() const { return dims_.empty(); }

  const Distribution* find(std::string_view name) const {
    for (const auto& [n, d] : dims_)
      if (n == name) return &d;
    return nullptr;
  }

  const Distribution& at(std::string_view name) const {
    if (const auto* d = find(name)) return *d;
    throw InvalidArgument("unknown dimension '" + std::string(name) + "'");
  }

 private:
  std::vector<Dimension> dims_;
};

// One concrete configuration: dimension name -> value.
class ParamAssignment {
 public:
  ParamAssignment() = default;
  explicit ParamAssignment(std::map<std::string, ParamValue> values) : values_(std::move(values)) {}

  const std::map<std::string, ParamValue>& values() const { return values_; }
  void set(std::string name, ParamValue v) { values_[std::move(name)] = std::move(v); }
  bool contains(std::string_view name) const { return values_.find(std::string(name)) != values_.end(); }

  const ParamValue& at(std::string_view name) const {
    auto it = values_.find(std::string(name));
    if (it == values_.end()) throw InvalidArgument("no value for '" + std::string(name) + "'");
    return it->second;
  }

  double real(std::string_view name) const {
    const auto& v = at(name);
    if (const auto* d = std::get_if<double>(&v)) return *d;
    throw InvalidArgument("'" + std::string(name) + "' holds a label, not a real");
  }

  const std::string& label(std::string_view name) const {
    const auto& v = at(name);
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    throw InvalidArgument("'" + std::string(name) + "' holds a real, not a label");
  }

  friend bool operator==(const ParamAssignment&, const ParamAssignment&) = default;

 private:
  std::map<std::string, ParamValue> values_;
};

namespace detail {

inline bool near_multiple(double v, double q) {
  const double k = v / q;
  return std::abs(k - std::round(k)) <= 1e-9 * std::max(1.0, std::abs(k));
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Probability of N(mu, sigma) falling in [a, b], accurate in both tails.
inline double normal_interval(double a, double b, double mu, double sigma) {
  const double za = (a - mu) / sigma;
  const double zb = (b - mu) / sigma;
  if (za > 0) return normal_cdf(-za) - normal_cdf(-zb);
  return normal_cdf(zb) - normal_cdf(za);
}

inline std::vector<double> quantized_range(double lo, double hi, double q) {
  std::vector<double> out;
  const double kmin = std::round(lo / q);
  const double kmax = std::round(hi / q);
  for (double k = kmin; k <= kmax; k += 1.0) out.push_back(k * q);
  return out;
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n == 1) return {0.5 * (lo + hi)};
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  out.back() = hi;
  return out;
}

}  // namespace detail

inline bool in_support(const Distribution& dist, const ParamValue& value) {
  if (const auto* c = std::get_if<Choice>(&dist)) {
    const auto* s = std::get_if<std::string>(&value);
    return s && std::find(c->options.begin(), c->options.end(), *s) != c->options.end();
  }
  const auto* pv = std::get_if<double>(&value);
  if (!pv || !std::isfinite(*pv)) return false;
  const double v = *pv;
  return std::visit(
      Overloaded{
          [&](const Uniform& d) { return v >= d.lo && v <= d.hi; },
          [&](const LogUniform& d) { return v >= d.lo && v <= d.hi; },
          [&](const QUniform& d) {
            return detail::near_multiple(v, d.q) && v - d.q / 2 <= d.hi && v + d.q / 2 >= d.lo;
          },
          [&](const QLogUniform& d) {
            return detail::near_multiple(v, d.q) && v - d.q / 2 <= d.hi && v + d.q / 2 >= d.lo;
          },
          [&](const Normal&) { return true; },
          [&](const QNormal& d) { return detail::near_multiple(v, d.q); },
          [&](const Choice&) { return false; },
      },
      dist);
}

inline bool in_support(const SearchSpace& space, const ParamAssignment& params) {
  if (params.values().size() != space.size()) return false;
  for (const auto& [name, dist] : space.dimensions()) {
    if (!params.contains(name) || !in_support(dist, params.at(name))) return false;
  }
  return true;
}

inline ParamValue sample(const Distribution& dist, Rng& rng) {
  return std::visit(
      Overloaded{
          [&](const Uniform& d) -> ParamValue { return rng.uniform(d.lo, d.hi); },
          [&](const LogUniform& d) -> ParamValue {
            const double x = std::exp(rng.uniform(std::log(d.lo), std::log(d.hi)));
            return std::clamp(x, d.lo, d.hi);
          },
          [&](const QUniform& d) -> ParamValue { return quantize(rng.uniform(d.lo, d.hi), d.q); },
          [&](const QLogUniform& d) -> ParamValue {
            const double x = std::exp(rng.uniform(std::log(d.lo), std::log(d.hi)));
            return quantize(std::clamp(x, d.lo, d.hi), d.q);
          },
          [&](const Normal& d) -> ParamValue { return rng.normal(d.mu, d.sigma); },
          [&](const QNormal& d) -> ParamValue { return quantize(rng.normal(d.mu, d.sigma), d.q); },
          [&](const Choice& d) -> ParamValue { return d.options[rng.below(d.options.size())]; },
      },
      dist);
}

// Draws every dimension independently, in declaration order.
inline ParamAssignment sample(const SearchSpace& space, Rng& rng) {
  ParamAssignment out;
  for (const auto& [name, dist] : space.dimensions()) out.set(name, sample(dist, rng));
  return out;
}

// Natural log of the density (continuous) or mass (quantized, choice).
// Values outside the support give negative infinity.
inline double log_density(const Distribution& dist, const ParamValue& value) {
  if (!in_support(dist, value)) return kNegInf;
  if (const auto* c = std::get_if<Choice>(&dist))
    return -std::log(static_cast<double>(c->options.size()));
  const double v = std::get<double>(value);
  auto safe_log = [](double p) { return p > 0 ? std::log(p) : kNegInf; };
  return std::visit(
      Overloaded{
          [&](const Uniform& d) { return -std::log(d.hi - d.lo); },
          [&](const LogUniform& d) { return -std::log(v) - std::log(std::log(d.hi) - std::log(d.lo)); },
          [&](const QUniform& d) {
            const double a = std::max(v - d.q / 2, d.lo);
            const double b = std::min(v + d.q / 2, d.hi);
            return safe_log((b - a) / (d.hi - d.lo));
          },
          [&](const QLogUniform& d) {
            const double a = std::max(v - d.q / 2, d.lo);
            const double b = std::min(v + d.q / 2, d.hi);
            if (b <= a) return kNegInf;
            return safe_log((std::log(b) - std::log(a)) / (std::log(d.hi) - std::log(d.lo)));
          },
          [&](const Normal& d) {
            const double z = (v - d.mu) / d.sigma;
            return -0.5 * z * z - std::log(d.sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
          },
          [&](const QNormal& d) {
            return safe_log(detail::normal_interval(v - d.q / 2, v + d.q / 2, d.mu, d.sigma));
          },
          [&](const Choice&) { return kNegInf; },
      },
      dist);
}

// Values a grid takes along one dimension. Continuous dimensions get
// `resolution` points (linear, geometric for log variants, mu +/- 2 sigma for
// normals); quantized dimensions and choices enumerate their full support.
inline std::vector<ParamValue> dimension_values(const Distribution& dist, std::size_t resolution) {
  if (resolution == 0) throw InvalidArgument("grid resolution must be >= 1");
  auto wrap = [](const std::vector<double>& xs) {
    return std::vector<ParamValue>(xs.begin(), xs.end());
  };
  return std::visit(
      Overloaded{
          [&](const Uniform& d) { return wrap(detail::linspace(d.lo, d.hi, resolution)); },
          [&](const LogUniform& d) {
            auto xs = detail::linspace(std::log(d.lo), std::log(d.hi), resolution);
            for (auto& x : xs) x = std::clamp(std::exp(x), d.lo, d.hi);
            if (resolution > 1) {
              xs.front() = d.lo;
              xs.back() = d.hi;
            }
            return wrap(xs);
          },
          [&](const QUniform& d) { return wrap(detail::quantized_range(d.lo, d.hi, d.q)); },
          [&](const QLogUniform& d) { return wrap(detail::quantized_range(d.lo, d.hi, d.q)); },
          [&](const Normal& d) {
            return wrap(detail::linspace(d.mu - 2 * d.sigma, d.mu + 2 * d.sigma, resolution));
          },
          [&](const QNormal& d) {
            return wrap(detail::quantized_range(d.mu - 2 * d.sigma, d.mu + 2 * d.sigma, d.q));
          },
          [&](const Choice& d) {
            return std::vector<ParamValue>(d.options.begin(), d.options.end());
          },
      },
      dist);
}

// Cartesian product over per-dimension value lists; the last dimension
// varies fastest.
inline std::vector<ParamAssignment> cartesian_product(
    const SearchSpace& space, const std::vector<std::vector<ParamValue>>& axes) {
  if (axes.size() != space.size()) throw InvalidArgument("one value list per dimension required");
  std::size_t total = 1;
  for (const auto& a : axes) {
    if (a.empty()) return {};
    total *= a.size();
  }
  std::vector<ParamAssignment> out;
  out.reserve(total);
  std::vector<std::size_t> idx(axes.size(), 0);
  for (std::size_t n = 0; n < total; ++n) {
    ParamAssignment p;
    for (std::size_t d = 0; d < axes.size(); ++d)
      p.set(space.dimensions()[d].first, axes[d][idx[d]]);
    out.push_back(std::move(p));
    for (std::size_t d = axes.size(); d-- > 0;) {
      if (++idx[d] < axes[d].size()) break;
      idx[d] = 0;
    }
  }
  return out;
}

inline std::vector<ParamAssignment> grid_points(const SearchSpace& space,
                                                const std::vector<std::size_t>& resolution) {
  if (resolution.size() != space.size())
    throw InvalidArgument("one resolution per dimension required");
  std::vector<std::vector<ParamValue>> axes;
  for (std::size_t d = 0; d < space.size(); ++d)
    axes.push_back(dimension_values(space.dimensions()[d].second, resolution[d]));
  return cartesian_product(space, axes);
}

inline std::vector<ParamAssignment> grid_points(const SearchSpace& space, std::size_t resolution) {
  return grid_points(space, std::vector<std::size_t>(space.size(), resolution));
}

// ---------------------------------------------------------------------------
// JSON space files:
//   {"eta": {"dist": "loguniform", "lo": 0.005, "hi": 0.3}, ...}

namespace detail {

inline double json_number(const nlohmann::ordered_json& obj, const std::string& dim,
                          const char* field) {
  const auto it = obj.find(field);
  if (it == obj.end())
    throw InvalidArgument("dimension '" + dim + "': missing field '" + field + "'");
  if (!it->is_number())
    throw InvalidArgument("dimension '" + dim + "': field '" + field + "' must be a number");
  return it->get<double>();
}

}  // namespace detail

inline SearchSpace space_from_json(const nlohmann::ordered_json& doc) {
  if (!doc.is_object()) throw InvalidArgument("space file must be a JSON object");
  std::vector<SearchSpace::Dimension> dims;
  for (const auto& [name, spec] : doc.items()) {
    if (!spec.is_object())
      throw InvalidArgument("dimension '" + name + "': expected an object");
    const auto kind = spec.find("dist");
    if (kind == spec.end() || !kind->is_string())
      throw InvalidArgument("dimension '" + name + "': missing field 'dist'");
    const auto k = kind->get<std::string>();
    auto num = [&](const char* f) { return detail::json_number(spec, name, f); };
    Distribution dist;
    if (k == "uniform") {
      dist = Uniform{num("lo"), num("hi")};
    } else if (k == "loguniform") {
      dist = LogUniform{num("lo"), num("hi")};
    } else if (k == "quniform") {
      dist = QUniform{num("lo"), num("hi"), num("q")};
    } else if (k == "qloguniform") {
      dist = QLogUniform{num("lo"), num("hi"), num("q")};
    } else if (k == "normal") {
      dist = Normal{num("mu"), num("sigma")};
    } else if (k == "qnormal") {
      dist = QNormal{num("mu"), num("sigma"), num("q")};
    } else if (k == "choice") {
      const auto opts = spec.find("options");
      if (opts == spec.end() || !opts->is_array())
        throw InvalidArgument("dimension '" + name + "': field 'options' must be an array");
      Choice c;
      for (const auto& o : *opts) {
        if (o.is_string())
          c.options.push_back(o.get<std::string>());
        else if (o.is_number() || o.is_boolean())
          c.options.push_back(o.dump());
        else
          throw InvalidArgument("dimension '" + name + "': field 'options' holds a non-scalar");
      }
      dist = std::move(c);
    } else {
      throw InvalidArgument("dimension '" + name + "': field 'dist' has unknown value '" + k + "'");
    }
    try {
      validate(dist);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("dimension '" + name + "': " + e.what());
    }
    dims.emplace_back(name, std::move(dist));
  }
  return SearchSpace(std::move(dims));
}

inline SearchSpace space_from_json_text(std::string_view text) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(std::string("space file is not valid JSON: ") + e.what());
  }
  return space_from_json(doc);
}

inline SearchSpace load_space(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open space file '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return space_from_json_text(text);
}

inline nlohmann::ordered_json to_json(const ParamAssignment& params) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& [name, v] : params.values())
    std::visit([&](const auto& x) { out[name] = x; }, v);
  return out;
}

}  // namespace rhpo
