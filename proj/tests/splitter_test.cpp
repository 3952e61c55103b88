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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "ndisc/multilinear.hpp"
#include "ndisc/random.hpp"
#include "ndisc/splitter.hpp"
#include "ndisc/valuations.hpp"

namespace ndisc {
namespace {

Profile additive_profile(const std::vector<std::vector<double>>& weights) {
  Profile p;
  for (const auto& w : weights) p.push_back(std::make_shared<AdditiveValuation>(w));
  return p;
}

// Imbalance recomputed from a coloring, column by column.
double recomputed_imbalance(const Profile& profile, const FractionalColoring& chi) {
  double worst = 0.0;
  for (const Valuation& v : profile) {
    std::vector<double> f;
    for (int l = 0; l < chi.color_count(); ++l) f.push_back(eval_exact(*v, chi.column(l)));
    const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
    worst = std::max(worst, *hi - *lo);
  }
  return worst;
}

// Largest additive value gap between two colors of a fractional coloring.
double additive_gap(const Profile& profile, const FractionalColoring& chi) {
  double worst = 0.0;
  for (const Valuation& v : profile) {
    const auto& w = dynamic_cast<const AdditiveValuation&>(*v).weights();
    for (int a = 0; a < chi.color_count(); ++a) {
      for (int b = 0; b < chi.color_count(); ++b) {
        double gap = 0.0;
        for (int j = 0; j < chi.item_count(); ++j) gap += w[j] * (chi(j, a) - chi(j, b));
        worst = std::max(worst, std::abs(gap));
      }
    }
  }
  return worst;
}

void expect_report_invariants(const SplitReport& r, int n, int k) {
  ASSERT_TRUE(r.cuts.has_value());
  EXPECT_LE(static_cast<int>(r.cuts->cuts.size()), n * (k - 1));
  EXPECT_TRUE(respects_interval_cap(*r.cuts, n));
  const std::vector<int> intervals = intervals_per_color(*r.cuts);
  for (int l = 0; l < k; ++l) {
    EXPECT_LE(intervals[l], interval_cap(n, k));
    EXPECT_LE(r.coloring.fractional_count(l), 2 * intervals[l]) << "color " << l;
  }
  EXPECT_EQ(r.converged, r.imbalance <= SearchConfig{}.tol);
}

TEST(IntervalCapTest, Values) {
  EXPECT_EQ(interval_cap(1, 2), 1);
  EXPECT_EQ(interval_cap(2, 2), 2);
  EXPECT_EQ(interval_cap(4, 3), 3);
  EXPECT_EQ(interval_cap(8, 4), 7);
  EXPECT_EQ(interval_cap(3, 3), 3);
}

TEST(CutVectorTest, IntervalsIgnoreEmptyPieces) {
  CutVector cv{{0.25, 0.25, 0.5}, {0, 1, 0, 1}, 2};
  cv.validate();
  // The length-zero piece labeled 1 merges the two 0 pieces.
  EXPECT_EQ(intervals_per_color(cv), (std::vector<int>{1, 1}));
  CutVector bad{{0.5, 0.25}, {0, 1, 0}, 2};
  EXPECT_THROW(bad.validate(), InputError);
  CutVector wrong_labels{{0.5}, {0, 2}, 2};
  EXPECT_THROW(wrong_labels.validate(), InputError);
}

TEST(CutsToColoringTest, HalfItemSplit) {
  const NecklaceLayout layout = NecklaceLayout::identity(4);
  const FractionalColoring chi = cuts_to_coloring(layout, CutVector{{0.375}, {0, 1}, 2});
  EXPECT_EQ(chi(0, 0), 1.0);
  EXPECT_EQ(chi(1, 0), 0.5);
  EXPECT_EQ(chi(1, 1), 0.5);
  EXPECT_EQ(chi(3, 1), 1.0);
  EXPECT_EQ(chi.fractional_items(), 1);
}

TEST(CutsToColoringTest, FollowsLayoutOrder) {
  const NecklaceLayout layout{{2, 0, 1}};
  const FractionalColoring chi = cuts_to_coloring(layout, CutVector{{1.0 / 3.0}, {1, 0}, 2});
  // Position 0 holds item 2.
  EXPECT_EQ(chi(2, 1), 1.0);
  EXPECT_EQ(chi(0, 0), 1.0);
  EXPECT_EQ(chi(1, 0), 1.0);
  EXPECT_THROW((NecklaceLayout{{0, 0, 1}}.validate()), InputError);
}

TEST(CutsToColoringTest, RandomCutVectorsGiveValidColorings) {
  Rng rng(5);
  for (int c = 0; c < 200; ++c) {
    const int m = 1 + static_cast<int>(rng.below(20));
    const int k = 2 + static_cast<int>(rng.below(3));
    const int cuts = static_cast<int>(rng.below(9));
    CutVector cv;
    cv.color_count = k;
    for (int i = 0; i < cuts; ++i) {
      // Some cuts land exactly on item boundaries or on each other.
      const double r = rng.uniform();
      cv.cuts.push_back(r < 0.3 ? static_cast<double>(rng.below(m + 1)) / m : rng.uniform());
    }
    std::sort(cv.cuts.begin(), cv.cuts.end());
    for (int p = 0; p <= cuts; ++p) cv.labels.push_back(static_cast<int>(rng.below(k)));
    cv.validate();
    const NecklaceLayout layout = NecklaceLayout::shuffled(m, c);
    FractionalColoring chi;
    ASSERT_NO_THROW(chi = cuts_to_coloring(layout, cv)) << "case " << c;
    const std::vector<int> intervals = intervals_per_color(cv);
    for (int l = 0; l < k; ++l) {
      EXPECT_LE(chi.fractional_count(l), 2 * intervals[l]);
      // Column mass equals m times the total length labeled l.
      double length = 0.0;
      for (int p = 0; p <= cuts; ++p) {
        const double begin = p == 0 ? 0.0 : cv.cuts[p - 1];
        const double end = p == cuts ? 1.0 : cv.cuts[p];
        if (cv.labels[p] == l) length += end - begin;
      }
      double mass = 0.0;
      for (int j = 0; j < m; ++j) mass += chi(j, l);
      EXPECT_NEAR(mass, m * length, 1e-9);
    }
  }
}

TEST(SplitNecklaceTest, SymmetricSingleAgent) {
  const Profile p = additive_profile({{1.0, 1.0, 1.0, 1.0}});
  const SplitReport r = split_necklace(p, 2, NecklaceLayout::identity(4));
  EXPECT_EQ(r.imbalance, 0.0);
  EXPECT_TRUE(r.converged);
  ASSERT_TRUE(r.cuts.has_value());
  EXPECT_EQ(r.cuts->cuts, (std::vector<double>{0.5}));
  EXPECT_NE(r.cuts->labels[0], r.cuts->labels[1]);
  expect_report_invariants(r, 1, 2);
}

TEST(SplitNecklaceTest, ThreeUnitItemsThreeColors) {
  const Profile p = additive_profile({{1.0, 1.0, 1.0}});
  const SplitReport r = split_necklace(p, 3, NecklaceLayout::identity(3));
  EXPECT_LE(r.imbalance, 1e-12);
  EXPECT_TRUE(r.coloring.fractional_items() == 0);
  for (int l = 0; l < 3; ++l) {
    double mass = 0.0;
    for (int j = 0; j < 3; ++j) mass += r.coloring(j, l);
    EXPECT_EQ(mass, 1.0);
  }
}

TEST(SplitNecklaceTest, TwoAdditiveAgentsConverge) {
  const Instance inst = random_instance("additive-uniform", 2, 8, 17);
  SearchConfig config;
  config.tol = 1e-6;
  const SplitReport r = split_necklace(inst.valuations, 2, NecklaceLayout::identity(8), config);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.imbalance, 1e-6);
  expect_report_invariants(r, 2, 2);
  EXPECT_LE(additive_gap(inst.valuations, r.coloring), 1e-6);
  // The linear-algebra path agrees that an equal split exists.
  const SplitReport exact = split_additive_exact(inst.valuations, 2);
  EXPECT_TRUE(exact.converged);
}

TEST(SplitNecklaceTest, ReportedImbalanceMatchesColoring) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const int n = 2 + static_cast<int>(seed % 2);
    const int k = 2 + static_cast<int>(seed % 3 == 0);
    const Instance inst = random_instance("coverage", n, 8, seed);
    SearchConfig config;
    config.restarts = 6;
    config.seed = seed;
    const SplitReport r = split_necklace(inst.valuations, k, NecklaceLayout::shuffled(8, seed), config);
    EXPECT_NEAR(r.imbalance, recomputed_imbalance(inst.valuations, r.coloring), 1e-12);
    expect_report_invariants(r, n, k);
    EXPECT_LE(r.max_fractional_per_color, 2 * n);
  }
}

TEST(SplitNecklaceTest, IncumbentStrictlyDecreases) {
  const Instance inst = random_instance("table-random-lipschitz", 3, 8, 4);
  SearchConfig config;
  config.restarts = 4;
  config.record_trace = true;
  config.stop_at_tol = false;
  const SplitReport r = split_necklace(inst.valuations, 3, NecklaceLayout::identity(8), config);
  ASSERT_FALSE(r.trace.empty());
  EXPECT_EQ(static_cast<int>(r.trace.size()), r.iterations + 1);
  for (std::size_t t = 1; t < r.trace.size(); ++t) EXPECT_LT(r.trace[t], r.trace[t - 1]);
  EXPECT_EQ(r.trace.back(), r.imbalance);
}

TEST(SplitNecklaceTest, DeterministicAcrossWorkerCounts) {
  const Instance inst = random_instance("coverage", 3, 9, 8);
  SearchConfig config;
  config.restarts = 6;
  config.seed = 99;
  config.stop_at_tol = false;
  const SplitReport a = split_necklace(inst.valuations, 2, NecklaceLayout::identity(9), config);
  const SplitReport b = split_necklace(inst.valuations, 2, NecklaceLayout::identity(9), config);
  config.workers = 3;
  const SplitReport c = split_necklace(inst.valuations, 2, NecklaceLayout::identity(9), config);
  EXPECT_EQ(a.coloring.data(), b.coloring.data());
  EXPECT_EQ(a.coloring.data(), c.coloring.data());
  EXPECT_EQ(a.imbalance, c.imbalance);
  EXPECT_EQ(a.restart_index, c.restart_index);
  EXPECT_EQ(a.restarts_run, 6);
}

TEST(SplitNecklaceTest, InputAndCapacityErrors) {
  const Profile p = additive_profile({{1.0, 1.0}});
  EXPECT_THROW(split_necklace(p, 1, NecklaceLayout::identity(2)), InputError);
  EXPECT_THROW(split_necklace(p, 2, NecklaceLayout::identity(3)), InputError);
  SearchConfig bad;
  bad.tol = 0.0;
  EXPECT_THROW(split_necklace(p, 2, NecklaceLayout::identity(2), bad), InputError);
  // 24 agents and two colors allow 13 intervals, so up to 26 fractional items.
  const Instance big = random_instance("additive-uniform", 24, 30, 1);
  EXPECT_THROW(split_necklace(big.valuations, 2, NecklaceLayout::identity(30)), CapacityError);
}

TEST(SplitAdditiveExactTest, TwoUnitItems) {
  const Profile p = additive_profile({{1.0, 1.0}});
  const SplitReport r = split_additive_exact(p, 2);
  EXPECT_LE(r.imbalance, 1e-9);
  EXPECT_LE(r.coloring.fractional_items(), 1);
}

TEST(SplitAdditiveExactTest, IntegralSplitExists) {
  const Profile p = additive_profile({{3.0, 1.0, 1.0, 1.0}});
  // Exhaustive check that an exact integral split exists.
  bool exists = false;
  for (int s = 0; s < 16; ++s) {
    double a = 0.0;
    for (int j = 0; j < 4; ++j) a += (s >> j) & 1 ? (j == 0 ? 3.0 : 1.0) : 0.0;
    exists |= a == 3.0;
  }
  ASSERT_TRUE(exists);
  const SplitReport r = split_additive_exact(p, 2);
  EXPECT_LE(r.imbalance, 1e-9);
  EXPECT_TRUE(r.converged);
}

TEST(SplitAdditiveExactTest, RandomThreeColors) {
  const Instance inst = random_instance("additive-signed", 2, 6, 31);
  const SplitReport r = split_additive_exact(inst.valuations, 3);
  EXPECT_LE(r.imbalance, 1e-9);
  EXPECT_LE(additive_gap(inst.valuations, r.coloring), 1e-9);
  for (int l = 0; l < 3; ++l) EXPECT_LE(r.coloring.fractional_count(l), 4);
}

TEST(SplitAdditiveExactTest, ManyRandomInstances) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const int n = 1 + static_cast<int>(seed % 4);
    const int k = 2 + static_cast<int>(seed % 3);
    const int m = 3 + static_cast<int>(seed % 10);
    const Instance inst = random_instance(seed % 2 ? "additive-uniform" : "additive-signed", n, m, seed);
    const SplitReport r = split_additive_exact(inst.valuations, k);
    EXPECT_LE(additive_gap(inst.valuations, r.coloring), 1e-9) << "seed " << seed;
    EXPECT_LE(r.coloring.fractional_items(), n * (k - 1)) << "seed " << seed;
    EXPECT_TRUE(r.converged);
  }
}

TEST(SplitAdditiveExactTest, RankDeficientInput) {
  // Duplicate agents and zero weights leave a large null space.
  const Profile p = additive_profile({{1.0, 0.0, 1.0, 0.0, 1.0}, {1.0, 0.0, 1.0, 0.0, 1.0}});
  const SplitReport r = split_additive_exact(p, 2);
  EXPECT_LE(additive_gap(p, r.coloring), 1e-9);
  EXPECT_LE(r.coloring.fractional_items(), 2);
}

TEST(SplitAdditiveExactTest, RejectsNonAdditive) {
  const Instance inst = random_instance("coverage", 1, 4, 1);
  EXPECT_THROW(split_additive_exact(inst.valuations, 2), InputError);
}

}  // namespace
}  // namespace ndisc
