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
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "ndisc/error.hpp"
#include "ndisc/random.hpp"
#include "ndisc/subset.hpp"
#include "ndisc/valuations.hpp"

namespace ndisc {

// Coordinates this close to 0 or 1 are treated as integral.
inline constexpr double kSnapTolerance = 1e-12;

// Exact evaluation enumerates 2^t subsets of the fractional support.
inline constexpr int kMaxExactSupport = 24;

// Per-item inclusion probabilities x in [0,1]^m.
class FractionalVector {
 public:
  FractionalVector() = default;
  explicit FractionalVector(std::vector<double> x) : x_(std::move(x)) {
    if (x_.empty() || x_.size() > static_cast<std::size_t>(kMaxItems)) {
      throw InputError("fractional vector length must be in [1, 64]");
    }
    for (double& v : x_) {
      if (!std::isfinite(v) || v < -kSnapTolerance || v > 1.0 + kSnapTolerance) {
        throw InputError("fractional coordinate outside [0, 1]");
      }
      if (v <= kSnapTolerance) v = 0.0;
      if (v >= 1.0 - kSnapTolerance) v = 1.0;
    }
  }

  static FractionalVector indicator(int m, Subset s) {
    std::vector<double> x(m, 0.0);
    for (int j : s.items()) x.at(j) = 1.0;
    return FractionalVector(std::move(x));
  }

  int size() const { return static_cast<int>(x_.size()); }
  double operator[](int j) const { return x_[j]; }
  std::span<const double> values() const { return x_; }

  // Items with x_j = 1.
  Subset ones() const {
    Subset s;
    for (int j = 0; j < size(); ++j) {
      if (x_[j] == 1.0) s.insert(j);
    }
    return s;
  }

  // Items with 0 < x_j < 1, ascending.
  std::vector<int> fractional_support() const {
    std::vector<int> out;
    for (int j = 0; j < size(); ++j) {
      if (x_[j] > 0.0 && x_[j] < 1.0) out.push_back(j);
    }
    return out;
  }

  int fractional_count() const {
    return static_cast<int>(fractional_support().size());
  }
  bool is_integral() const { return fractional_count() == 0; }

 private:
  std::vector<double> x_;
};

namespace detail {

// Probability and item mask of every subset of a group of fractional items.
struct SubsetTable {
  std::vector<double> prob;
  std::vector<std::uint64_t> mask;
};

inline SubsetTable subset_table(const FractionalVector& x,
                                std::span<const int> items) {
  const std::size_t count = std::size_t{1} << items.size();
  SubsetTable t{std::vector<double>(count), std::vector<std::uint64_t>(count)};
  t.prob[0] = 1.0;
  t.mask[0] = 0;
  for (std::size_t s = 0; s < items.size(); ++s) {
    const double p = x[items[s]];
    const std::size_t half = std::size_t{1} << s;
    for (std::size_t idx = 0; idx < half; ++idx) {
      t.prob[idx | half] = t.prob[idx] * p;
      t.mask[idx | half] = t.mask[idx] | (std::uint64_t{1} << items[s]);
      t.prob[idx] *= 1.0 - p;
    }
  }
  return t;
}

}  // namespace detail

// F(x) = E_{S~x}[v(S)], summing over subsets R of the fractional support J:
// sum_R v(T + R) prod_{j in R} x_j prod_{j in J - R} (1 - x_j), T = {j : x_j = 1}.
inline double eval_exact(const ValuationOracle& v, const FractionalVector& x) {
  if (x.size() != v.item_count()) {
    throw InputError("fractional vector length " + std::to_string(x.size()) +
                     " does not match m=" + std::to_string(v.item_count()));
  }
  const std::vector<int> support = x.fractional_support();
  const int t = static_cast<int>(support.size());
  if (t > kMaxExactSupport) {
    throw CapacityError("fractional support " + std::to_string(t) +
                        " exceeds the exact-evaluation cap of 24; use eval_mc");
  }
  const std::uint64_t base = x.ones().bits();
  if (t == 0) return v.value(Subset(base));

  // Meet in the middle: the full 2^t table would cost 2^t doubles of memory.
  const int low_count = t / 2;
  std::span<const int> all(support);
  const auto low = detail::subset_table(x, all.first(low_count));
  const auto high = detail::subset_table(x, all.subspan(low_count));

  double total = 0.0;
  for (std::size_t h = 0; h < high.prob.size(); ++h) {
    if (high.prob[h] == 0.0) continue;
    double inner = 0.0;
    const std::uint64_t hb = base | high.mask[h];
    for (std::size_t l = 0; l < low.prob.size(); ++l) {
      inner += low.prob[l] * v.value(Subset(hb | low.mask[l]));
    }
    total += high.prob[h] * inner;
  }
  return total;
}

struct McEstimate {
  double mean = 0.0;
  // Hoeffding 95% half-width from the range L * |fractional support|.
  double half_width = 0.0;
  std::uint64_t trials = 0;
};

// Trials are grouped in fixed blocks with their own derived seeds, so the
// estimate does not depend on how many workers share the blocks.
inline constexpr std::uint64_t kMcBlock = 4096;

inline McEstimate eval_mc(const ValuationOracle& v, const FractionalVector& x,
                          std::uint64_t trials, std::uint64_t seed,
                          int workers = 1) {
  if (trials < 1) throw InputError("eval_mc needs at least one trial");
  if (x.size() != v.item_count()) {
    throw InputError("fractional vector length does not match the oracle");
  }
  const std::vector<int> support = x.fractional_support();
  const std::uint64_t base = x.ones().bits();
  const std::uint64_t blocks = (trials + kMcBlock - 1) / kMcBlock;
  std::vector<double> block_sums(blocks, 0.0);

  auto run_block = [&](std::uint64_t b) {
    Rng rng(derive_seed(seed, b));
    const std::uint64_t begin = b * kMcBlock;
    const std::uint64_t end = std::min(trials, begin + kMcBlock);
    double sum = 0.0;
    for (std::uint64_t t = begin; t < end; ++t) {
      std::uint64_t bits = base;
      for (int j : support) {
        if (rng.uniform() < x[j]) bits |= std::uint64_t{1} << j;
      }
      sum += v.value(Subset(bits));
    }
    block_sums[b] = sum;
  };

  workers = std::max(1, workers);
  if (workers == 1 || blocks == 1) {
    for (std::uint64_t b = 0; b < blocks; ++b) run_block(b);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::uint64_t b = w; b < blocks; b += workers) run_block(b);
      });
    }
  }

  double total = 0.0;
  for (double s : block_sums) total += s;
  McEstimate est;
  est.trials = trials;
  est.mean = total / static_cast<double>(trials);
  const double range = v.marginal_bound() * static_cast<double>(support.size());
  est.half_width =
      range * std::sqrt(std::log(2.0 / 0.05) / (2.0 * static_cast<double>(trials)));
  return est;
}

}  // namespace ndisc
