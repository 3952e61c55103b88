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
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ndisc/coloring.hpp"
#include "ndisc/error.hpp"
#include "ndisc/subset.hpp"
#include "ndisc/valuations.hpp"

namespace ndisc {

struct DiscrepancyValue {
  double value = 0.0;
  int agent = 0;
  std::pair<int, int> colors{0, 0};
};

// max over agents i and color pairs (l, l') of |v_i(bundle l) - v_i(bundle l')|.
inline DiscrepancyValue disc_of_coloring(const Profile& profile, int k,
                                         const Coloring& coloring) {
  const int m = profile_items(profile);
  if (coloring.item_count() != m) throw InputError("coloring length differs from m");
  if (coloring.color_count() > k) throw InputError("coloring uses more than k colors");
  const std::vector<Subset> bundles = Coloring(k, coloring.colors()).bundles();
  DiscrepancyValue best;
  std::vector<double> values(k);
  for (std::size_t i = 0; i < profile.size(); ++i) {
    for (int l = 0; l < k; ++l) values[l] = profile[i]->value(bundles[l]);
    for (int a = 0; a < k; ++a) {
      for (int b = a + 1; b < k; ++b) {
        const double gap = std::abs(values[a] - values[b]);
        if (gap > best.value) best = {gap, static_cast<int>(i), {a, b}};
      }
    }
  }
  return best;
}

struct DiscrepancyOptimum {
  DiscrepancyValue disc;
  Coloring coloring;
};

inline constexpr double kMaxBruteForceColorings = 1e7;

// Exact disc(V, k) by enumerating all k^m colorings.
inline DiscrepancyOptimum disc_opt_bruteforce(const Profile& profile, int k) {
  const int m = profile_items(profile);
  if (k < 1) throw InputError("need at least one color");
  if (std::pow(static_cast<double>(k), m) > kMaxBruteForceColorings) {
    throw CapacityError("k^m = " + std::to_string(k) + "^" + std::to_string(m) +
                        " exceeds the brute-force budget of 1e7 colorings");
  }
  const int n = static_cast<int>(profile.size());
  std::vector<int> colors(m, 0);
  std::vector<std::uint64_t> masks(k, 0);
  masks[0] = Subset::full(m).bits();
  std::vector<double> values(k);

  DiscrepancyOptimum best{{std::numeric_limits<double>::infinity(), 0, {0, 0}},
                          Coloring(k, colors)};
  while (true) {
    DiscrepancyValue current;
    for (int i = 0; i < n && current.value < best.disc.value; ++i) {
      for (int l = 0; l < k; ++l) values[l] = profile[i]->value(Subset(masks[l]));
      for (int a = 0; a < k; ++a) {
        for (int b = a + 1; b < k; ++b) {
          const double gap = std::abs(values[a] - values[b]);
          if (gap > current.value) current = {gap, i, {a, b}};
        }
      }
    }
    if (current.value < best.disc.value) {
      best = {current, Coloring(k, colors)};
      if (best.disc.value == 0.0) break;
    }
    // Odometer step, item 0 least significant.
    int j = 0;
    for (; j < m; ++j) {
      const std::uint64_t bit = std::uint64_t{1} << j;
      masks[colors[j]] &= ~bit;
      colors[j] = (colors[j] + 1) % k;
      masks[colors[j]] |= bit;
      if (colors[j] != 0) break;
    }
    if (j == m) break;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Transfer imbalance

inline constexpr int kMaxTransferItems = 22;

struct TransferValue {
  int value = 0;
  // Witness: items leaving the richer bundle and items leaving the poorer one.
  Subset from_richer;
  Subset from_poorer;
  // True iff the first argument was the (weakly) richer bundle.
  bool first_is_richer = true;
};

// T_v(A, B): the fewest items to exchange between A and B so that the
// weakly richer side is no longer strictly richer. Enumerates exchanges by
// total size, so the first success is minimal.
inline TransferValue transfer_imbalance(const ValuationOracle& v, Subset a, Subset b) {
  if (!a.disjoint(b)) throw InputError("transfer_imbalance needs disjoint bundles");
  if (!a.fits(v.item_count()) || !b.fits(v.item_count())) {
    throw InputError("bundle references an item >= m");
  }
  const int pool_size = (a | b).size();
  if (pool_size > kMaxTransferItems) {
    throw CapacityError("|A| + |B| = " + std::to_string(pool_size) +
                        " exceeds the transfer enumeration cap of 22");
  }
  TransferValue out;
  out.first_is_richer = v.value(a) >= v.value(b);
  const Subset rich = out.first_is_richer ? a : b;
  const Subset poor = out.first_is_richer ? b : a;
  const std::vector<int> pool = (rich | poor).items();

  auto reversed = [&](Subset moved) {
    const Subset s = moved & rich;
    const Subset s_prime = moved & poor;
    return v.value((rich - s) | s_prime) <= v.value((poor - s_prime) | s);
  };

  for (int size = 0; size <= pool_size; ++size) {
    if (size == 0) {
      if (reversed(Subset())) return out;
      continue;
    }
    // Gosper's hack over local masks of the pool with `size` bits set.
    const std::uint64_t limit = std::uint64_t{1} << pool_size;
    for (std::uint64_t local = (std::uint64_t{1} << size) - 1; local < limit;) {
      const Subset moved = scatter_bits(local, pool);
      if (reversed(moved)) {
        out.value = size;
        out.from_richer = moved & rich;
        out.from_poorer = moved & poor;
        return out;
      }
      const std::uint64_t c = local & (0 - local);
      const std::uint64_t r = local + c;
      local = (((r ^ local) >> 2) / c) | r;
    }
  }
  // Moving everything swaps the bundles, which always succeeds.
  throw ContractViolation("transfer enumeration found no witness");
}

// max over agents and color pairs of T_{v_i}(bundle l, bundle l').
inline DiscrepancyValue transfer_disc_of_coloring(const Profile& profile, int k,
                                                  const Coloring& coloring) {
  const int m = profile_items(profile);
  if (coloring.item_count() != m) throw InputError("coloring length differs from m");
  const std::vector<Subset> bundles = Coloring(k, coloring.colors()).bundles();
  DiscrepancyValue best;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    for (int a = 0; a < k; ++a) {
      for (int b = a + 1; b < k; ++b) {
        const double t = transfer_imbalance(*profile[i], bundles[a], bundles[b]).value;
        if (t > best.value) best = {t, static_cast<int>(i), {a, b}};
      }
    }
  }
  return best;
}

// Signed transfer imbalance of the bipartition (S, S^c):
//   v'(S) = +T_v(S, S^c) if v(S) >= v(S^c), and -T_v(S, S^c) otherwise.
// Anti-symmetric. Flipping one item changes |v'| by at most 1, but a flip
// that reverses a strict preference moves v' from +1 to -1, so the declared
// marginal bound is 2.
class TransferValuation final : public ValuationOracle {
 public:
  static constexpr int kTabulateBelow = 12;

  explicit TransferValuation(Valuation base)
      : ValuationOracle(ValuationKind::kTransferDerived, checked_items(base), 2.0),
        base_(std::move(base)) {
    const int m = item_count();
    if (m <= kTabulateBelow) {
      table_.resize(std::size_t{1} << m);
      for (std::size_t s = 0; s < table_.size(); ++s) table_[s] = compute(Subset(s));
    }
  }

  double value(Subset s) const override {
    return table_.empty() ? compute(s) : table_[s.bits()];
  }

  const Valuation& base() const { return base_; }

 private:
  static int checked_items(const Valuation& base) {
    if (!base) throw InputError("null base valuation");
    if (base->item_count() > kMaxTransferItems) {
      throw CapacityError("transfer-derived valuations need m <= 22");
    }
    return base->item_count();
  }

  double compute(Subset s) const {
    const Subset rest = s.complement(item_count());
    const TransferValue t = transfer_imbalance(*base_, s, rest);
    return t.first_is_richer ? t.value : -t.value;
  }

  Valuation base_;
  std::vector<double> table_;
};

inline Valuation vprime_transform(const Valuation& v) {
  return std::make_shared<TransferValuation>(v);
}

inline Profile vprime_transform(const Profile& profile) {
  Profile out;
  out.reserve(profile.size());
  for (const auto& v : profile) out.push_back(vprime_transform(v));
  return out;
}

}  // namespace ndisc
