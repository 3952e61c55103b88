// Copyright 2026 The ndisc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ndisc/error.hpp"
#include "ndisc/random.hpp"
#include "ndisc/subset.hpp"

namespace ndisc {

enum class ValuationKind { kAdditive, kTable, kCoverage, kTransferDerived, kCustom };

inline std::string_view to_string(ValuationKind kind) {
  switch (kind) {
    case ValuationKind::kAdditive: return "additive";
    case ValuationKind::kTable: return "table";
    case ValuationKind::kCoverage: return "coverage";
    case ValuationKind::kTransferDerived: return "transfer-derived";
    case ValuationKind::kCustom: return "custom";
  }
  return "unknown";
}

// A set function v: 2^M -> R over m <= 64 items, with a declared bound L on
// |v(S + j) - v(S)|. Oracles are immutable once built and may be evaluated
// concurrently.
class ValuationOracle {
 public:
  virtual ~ValuationOracle() = default;

  int item_count() const { return m_; }
  double marginal_bound() const { return bound_; }
  ValuationKind kind() const { return kind_; }

  // Unchecked evaluation; `s` must fit in item_count().
  virtual double value(Subset s) const = 0;

  double operator()(Subset s) const {
    if (!s.fits(m_)) {
      throw InputError("subset " + s.to_string() + " references an item >= m=" +
                       std::to_string(m_));
    }
    return value(s);
  }

 protected:
  ValuationOracle(ValuationKind kind, int m, double bound)
      : kind_(kind), m_(m), bound_(bound) {
    if (m < 1 || m > kMaxItems) {
      throw InputError("item count must be in [1, 64], got " + std::to_string(m));
    }
    if (!(bound >= 0.0) || !std::isfinite(bound)) {
      throw InputError("marginal bound must be finite and non-negative");
    }
  }

 private:
  ValuationKind kind_;
  int m_;
  double bound_;
};

using Valuation = std::shared_ptr<const ValuationOracle>;

// One valuation per agent; all share the same item count.
using Profile = std::vector<Valuation>;

inline double eval(const ValuationOracle& v, Subset s) { return v(s); }

inline int profile_items(const Profile& profile) {
  if (profile.empty()) throw InputError("profile has no agents");
  const int m = profile.front()->item_count();
  for (const auto& v : profile) {
    if (!v) throw InputError("null valuation in profile");
    if (v->item_count() != m) {
      throw InputError("agents disagree on the item count");
    }
  }
  return m;
}

// v(S) = sum of weights[j] over j in S.
class AdditiveValuation final : public ValuationOracle {
 public:
  explicit AdditiveValuation(std::vector<double> weights,
                             std::optional<double> bound = std::nullopt)
      : ValuationOracle(ValuationKind::kAdditive, static_cast<int>(weights.size()),
                        bound.value_or(max_abs(weights))),
        weights_(std::move(weights)) {
    for (double w : weights_) {
      if (!std::isfinite(w) || std::abs(w) > marginal_bound()) {
        throw InputError("additive weight outside [-L, L]");
      }
    }
  }

  double value(Subset s) const override {
    double total = 0.0;
    for (std::uint64_t b = s.bits(); b != 0; b &= b - 1) {
      total += weights_[std::countr_zero(b)];
    }
    return total;
  }

  const std::vector<double>& weights() const { return weights_; }

 private:
  static double max_abs(const std::vector<double>& w) {
    double out = 0.0;
    for (double x : w) out = std::max(out, std::abs(x));
    return out;
  }

  std::vector<double> weights_;
};

inline constexpr int kMaxTableItems = 20;

// Largest |t[S + j] - t[S]| over all (S, j); table indexed by bitmask.
inline double max_table_marginal(int m, const std::vector<double>& table) {
  double best = 0.0;
  const std::uint64_t count = std::uint64_t{1} << m;
  for (std::uint64_t s = 0; s < count; ++s) {
    for (int j = 0; j < m; ++j) {
      const std::uint64_t bit = std::uint64_t{1} << j;
      if (s & bit) continue;
      best = std::max(best, std::abs(table[s | bit] - table[s]));
    }
  }
  return best;
}

// Explicit value per subset, indexed by bitmask. m <= 20.
class TableValuation final : public ValuationOracle {
 public:
  TableValuation(int m, std::vector<double> table,
                 std::optional<double> bound = std::nullopt)
      : ValuationOracle(ValuationKind::kTable, checked_items(m),
                        bound ? *bound : measured_bound(m, table)),
        table_(std::move(table)) {
    if (table_.size() != (std::size_t{1} << m)) {
      throw InputError("table length must be 2^m");
    }
  }

  double value(Subset s) const override { return table_[s.bits()]; }

  const std::vector<double>& table() const { return table_; }

 private:
  static int checked_items(int m) {
    if (m < 1 || m > kMaxTableItems) {
      throw CapacityError("table valuations support 1 <= m <= 20, got " +
                          std::to_string(m));
    }
    return m;
  }
  static double measured_bound(int m, const std::vector<double>& table) {
    if (table.size() != (std::size_t{1} << checked_items(m))) {
      throw InputError("table length must be 2^m");
    }
    return max_table_marginal(m, table);
  }

  std::vector<double> table_;
};

// Weighted coverage: each item covers a subset of a universe of at most 64
// elements; v(S) is the total weight of the covered elements.
class CoverageValuation final : public ValuationOracle {
 public:
  CoverageValuation(int universe_size, std::vector<Subset> item_sets,
                    std::vector<double> element_weights)
      : ValuationOracle(ValuationKind::kCoverage, static_cast<int>(item_sets.size()),
                        largest_set_weight(universe_size, item_sets, element_weights)),
        universe_size_(universe_size),
        item_sets_(std::move(item_sets)),
        element_weights_(std::move(element_weights)) {}

  double value(Subset s) const override {
    std::uint64_t covered = 0;
    for (std::uint64_t b = s.bits(); b != 0; b &= b - 1) {
      covered |= item_sets_[std::countr_zero(b)].bits();
    }
    return weight_of(covered, element_weights_);
  }

  int universe_size() const { return universe_size_; }
  const std::vector<Subset>& item_sets() const { return item_sets_; }
  const std::vector<double>& element_weights() const { return element_weights_; }

 private:
  static double weight_of(std::uint64_t elements, const std::vector<double>& w) {
    double total = 0.0;
    for (; elements != 0; elements &= elements - 1) {
      total += w[std::countr_zero(elements)];
    }
    return total;
  }

  // The marginal of j is the weight of item_sets[j] not already covered, so
  // it peaks at S = {} and is bounded by the full set weight.
  static double largest_set_weight(int universe_size,
                                   const std::vector<Subset>& sets,
                                   const std::vector<double>& w) {
    if (universe_size < 1 || universe_size > 64) {
      throw InputError("coverage universe size must be in [1, 64]");
    }
    if (w.size() != static_cast<std::size_t>(universe_size)) {
      throw InputError("need one weight per universe element");
    }
    for (double x : w) {
      if (!(x >= 0.0) || !std::isfinite(x)) {
        throw InputError("coverage weights must be finite and non-negative");
      }
    }
    double best = 0.0;
    for (Subset s : sets) {
      if (!s.fits(universe_size)) {
        throw InputError("item set references an element outside the universe");
      }
      best = std::max(best, weight_of(s.bits(), w));
    }
    return best;
  }

  int universe_size_;
  std::vector<Subset> item_sets_;
  std::vector<double> element_weights_;
};

// Wraps an arbitrary deterministic function. The caller vouches for the bound.
class CustomValuation final : public ValuationOracle {
 public:
  CustomValuation(int m, double bound, std::function<double(Subset)> fn)
      : ValuationOracle(ValuationKind::kCustom, m, bound), fn_(std::move(fn)) {}

  double value(Subset s) const override { return fn_(s); }

 private:
  std::function<double(Subset)> fn_;
};

// ---------------------------------------------------------------------------
// Marginal-bound verification

enum class CheckMode { kExhaustive, kSampled };

struct MarginalReport {
  double max_observed = 0.0;
  Subset witness_set;  // S with |v(S + j) - v(S)| = max_observed
  int witness_item = -1;
  std::uint64_t pairs_checked = 0;
  bool violated = false;  // max_observed > declared bound
};

inline MarginalReport verify_marginal_bound(const ValuationOracle& v,
                                            CheckMode mode,
                                            std::uint64_t samples = 10000,
                                            std::uint64_t seed = 0) {
  const int m = v.item_count();
  MarginalReport report;
  auto consider = [&](Subset s, int j) {
    const double d = std::abs(v.value(s.with(j)) - v.value(s));
    ++report.pairs_checked;
    if (report.witness_item < 0 || d > report.max_observed) {
      report.max_observed = d;
      report.witness_set = s;
      report.witness_item = j;
    }
  };

  if (mode == CheckMode::kExhaustive) {
    if (m > kMaxTableItems) {
      throw CapacityError("exhaustive marginal check needs m <= 20, got " +
                          std::to_string(m));
    }
    const std::uint64_t count = std::uint64_t{1} << m;
    for (std::uint64_t bits = 0; bits < count; ++bits) {
      for (int j = 0; j < m; ++j) {
        if (!((bits >> j) & 1U)) consider(Subset(bits), j);
      }
    }
  } else {
    Rng rng(seed);
    const std::uint64_t mask = Subset::full(m).bits();
    for (std::uint64_t t = 0; t < samples; ++t) {
      const int j = static_cast<int>(rng.below(m));
      consider(Subset(rng.next() & mask).without(j), j);
    }
  }
  report.violated = report.max_observed > v.marginal_bound();
  return report;
}

// ---------------------------------------------------------------------------
// Random instance families

enum class Family { kAdditiveUniform, kAdditiveSigned, kCoverage, kTableRandomLipschitz };

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::kAdditiveUniform: return "additive-uniform";
    case Family::kAdditiveSigned: return "additive-signed";
    case Family::kCoverage: return "coverage";
    case Family::kTableRandomLipschitz: return "table-random-lipschitz";
  }
  return "unknown";
}

inline Family parse_family(std::string_view tag) {
  for (Family f : {Family::kAdditiveUniform, Family::kAdditiveSigned,
                   Family::kCoverage, Family::kTableRandomLipschitz}) {
    if (to_string(f) == tag) return f;
  }
  throw InputError("unknown instance family '" + std::string(tag) + "'");
}

struct FamilyParams {
  int coverage_universe = 0;       // 0: min(64, 2m)
  double coverage_density = 0.3;   // probability that an item covers an element
  double table_noise = 1.0;        // amplitude of the non-additive part
};

struct Instance {
  Family family = Family::kAdditiveUniform;
  std::uint64_t seed = 0;
  int m = 0;
  FamilyParams params;
  Profile valuations;
};

namespace detail {

inline Valuation random_coverage(int m, const FamilyParams& p, Rng& rng) {
  const int universe =
      p.coverage_universe > 0 ? p.coverage_universe : std::min(64, 2 * m);
  if (universe > 64) throw InputError("coverage universe must be <= 64");
  std::vector<Subset> sets(m);
  for (auto& s : sets) {
    for (int e = 0; e < universe; ++e) {
      if (rng.bernoulli(p.coverage_density)) s.insert(e);
    }
    if (s.empty()) s.insert(static_cast<int>(rng.below(universe)));
  }
  std::vector<double> raw(universe);
  for (auto& w : raw) w = rng.uniform(0.05, 1.0);
  double heaviest = 0.0;
  for (Subset s : sets) {
    double total = 0.0;
    for (int e : s.items()) total += raw[e];
    heaviest = std::max(heaviest, total);
  }
  // Floor onto the grid after scaling so that every set weighs at most 1
  // exactly.
  std::vector<double> weights(universe);
  for (int e = 0; e < universe; ++e) weights[e] = to_grid_floor(raw[e] / heaviest);
  return std::make_shared<CoverageValuation>(universe, std::move(sets),
                                             std::move(weights));
}

inline Valuation random_lipschitz_table(int m, const FamilyParams& p, Rng& rng) {
  if (m > kMaxTableItems) {
    throw CapacityError("table-random-lipschitz supports m <= 20");
  }
  std::vector<double> w(m);
  for (auto& x : w) x = rng.uniform(-1.0, 1.0);
  const std::size_t count = std::size_t{1} << m;
  std::vector<double> table(count);
  for (std::size_t s = 0; s < count; ++s) {
    double total = 0.0;
    for (int j = 0; j < m; ++j) {
      if ((s >> j) & 1U) total += w[j];
    }
    table[s] = total + p.table_noise * rng.uniform(-1.0, 1.0);
  }
  const double measured = max_table_marginal(m, table);
  if (measured > 0.0) {
    // The slack absorbs the grid rounding, keeping every marginal <= 1.
    const double scale = 1.0 / (measured * (1.0 + 0x1.0p-16));
    for (auto& x : table) x = to_grid(x * scale);
  }
  return std::make_shared<TableValuation>(m, std::move(table), 1.0);
}

}  // namespace detail

// n oracles with marginal bound 1 drawn from `family`. Agent i draws from its
// own stream derived from (seed, i).
inline Instance random_instance(Family family, int n, int m, std::uint64_t seed,
                                const FamilyParams& params = {}) {
  if (n < 1) throw InputError("need at least one agent");
  if (m < 1 || m > kMaxItems) throw InputError("item count must be in [1, 64]");
  Instance inst{family, seed, m, params, {}};
  inst.valuations.reserve(n);
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    switch (family) {
      case Family::kAdditiveUniform:
      case Family::kAdditiveSigned: {
        const double lo = family == Family::kAdditiveUniform ? 0.0 : -1.0;
        std::vector<double> w(m);
        for (auto& x : w) x = to_grid(rng.uniform(lo, 1.0));
        inst.valuations.push_back(std::make_shared<AdditiveValuation>(std::move(w), 1.0));
        break;
      }
      case Family::kCoverage:
        inst.valuations.push_back(detail::random_coverage(m, params, rng));
        break;
      case Family::kTableRandomLipschitz:
        inst.valuations.push_back(detail::random_lipschitz_table(m, params, rng));
        break;
    }
  }
  return inst;
}

inline Instance random_instance(std::string_view family, int n, int m,
                                std::uint64_t seed, const FamilyParams& params = {}) {
  return random_instance(parse_family(family), n, m, seed, params);
}

}  // namespace ndisc
