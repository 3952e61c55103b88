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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "ndisc.hpp"

namespace {

using namespace ndisc;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

SearchConfig search_for(std::uint64_t seed) {
  SearchConfig s;
  s.seed = derive_seed(seed, 0x73706c6974ULL);
  return s;
}

const char* const kFamilies[] = {"additive-signed", "coverage", "table-random-lipschitz",
                                 "additive-uniform"};

// 1. Pipeline value against the exact optimum.
Outcome oracle_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  int bad = 0;
  double worst_slack = std::numeric_limits<double>::infinity();
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const int n = 1 + static_cast<int>(seed % 3);
    const int k = 2 + static_cast<int>((seed / 3) % 2);
    const int m = 4 + static_cast<int>(seed % 5);
    const Instance inst = random_instance(kFamilies[seed % 4], n, m, seed);
    const PipelineResult p = run_pipeline(inst.valuations, k, NecklaceLayout::identity(m),
                                          search_for(seed), 64, seed);
    const double opt = disc_opt_bruteforce(inst.valuations, k).disc.value;
    const double realized = p.rounding.realized_disc;
    const double cap = std::max(1.0, 2.0 * opt) + p.rounding.bound_predicted;
    if (realized < opt || realized > cap) ++bad;
    worst_slack = std::min(worst_slack, cap - realized);
  }
  const double secs = seconds_since(start);
  return {bad == 0 && secs <= 300.0,
          fmt("%d/50 violations, min slack %.4f, %.1f s", bad, worst_slack, secs)};
}

// 2. Split structure and the sqrt(2 t log nk) rounding bound on coverage runs.
Outcome rounding_lemma() {
  const auto start = std::chrono::steady_clock::now();
  int structure_bad = 0;
  int converged = 0;
  int within = 0;
  int runs = 0;
  for (int seed = 1; runs < 30; ++seed) {
    for (int n : {2, 4, 8}) {
      for (int k : {2, 3, 4}) {
        if (runs == 30) break;
        if ((n * 3 + k + seed) % 3 != 0) continue;
        const int m = n == 8 ? 16 : 12;
        const Instance inst = random_instance("coverage", n, m, seed);
        const PipelineResult p = run_pipeline(inst.valuations, k, NecklaceLayout::identity(m),
                                              search_for(seed), 64, seed);
        ++runs;
        if (p.split.converged) {
          ++converged;
          const bool cuts_ok =
              p.split.cuts && static_cast<int>(p.split.cuts->cuts.size()) <= n * (k - 1);
          if (p.split.max_fractional_per_color > 2 * n || !cuts_ok) ++structure_bad;
        }
        const int t = p.split.max_fractional_per_color;
        const double bound = std::sqrt(2.0 * t * std::log(static_cast<double>(n) * k));
        if (p.rounding.realized_disc <= bound) ++within;
      }
    }
  }
  const double secs = seconds_since(start);
  const bool pass = structure_bad == 0 && within >= 27 && secs <= 900.0;
  return {pass, fmt("%d/30 within bound, %d converged, %d structure violations, %.1f s", within,
                    converged, structure_bad, secs)};
}

// 3. Shape of realized discrepancy in n for k = 2, on non-additive tables whose
// marginals reach the unit bound.
Outcome scaling_shape() {
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig c;
  c.command = Command::kSweep;
  c.cell_command = Command::kRound;
  c.family = "table-random-lipschitz";
  c.m = 16;
  c.k = 2;
  c.ns = {2, 3, 4, 5, 7, 8};
  for (std::uint64_t s = 1; s <= 20; ++s) c.seeds.push_back(s);
  const std::vector<ResultRecord> records = run(c);
  const ScalingFit fit = fit_scaling(records, ScalingModel::kSqrtNLogNK);
  std::string means;
  for (const ScalingPoint& p : fit.points) means += fmt(" n=%d:%.3f", p.n, p.mean);
  return {fit.residual <= 0.5, fmt("coefficient %.4f, residual %.4f,%s, %.1f s", fit.coefficient,
                                   fit.residual, means.c_str(), seconds_since(start))};
}

// 4. Properties of the signed transfer valuation and the two-color corollary.
Outcome transfer_properties() {
  int lipschitz_bad = 0;
  int antisym_bad = 0;
  double worst_jump = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const int m = 3 + static_cast<int>(seed % 6);
    const Valuation vp =
        vprime_transform(random_instance("table-random-lipschitz", 1, m, seed).valuations[0]);
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << m); ++s) {
      const double here = (*vp)(Subset(s));
      if (here != -(*vp)(Subset(s).complement(m))) ++antisym_bad;
      for (int x = 0; x < m; ++x) {
        const double jump = std::abs(here - (*vp)(Subset(s).flipped(x)));
        worst_jump = std::max(worst_jump, jump);
        if (jump > 1.0) ++lipschitz_bad;
      }
    }
  }
  int corollary_bad = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const int n = 1 + static_cast<int>(seed % 3);
    const int m = 4 + static_cast<int>(seed % 5);
    const Instance inst = random_instance(kFamilies[seed % 4], n, m, seed);
    const Profile derived = vprime_transform(inst.valuations);
    const PipelineResult p = run_pipeline(derived, 2, NecklaceLayout::identity(m),
                                          search_for(seed), 64, seed);
    const double t = transfer_disc_of_coloring(inst.valuations, 2, p.rounding.coloring).value;
    if (t > p.rounding.realized_disc / 2.0 + 1.0) ++corollary_bad;
  }
  return {lipschitz_bad == 0 && antisym_bad == 0 && corollary_bad == 0,
          fmt("%d single-item steps above 1 (largest %.0f), %d anti-symmetry violations, "
              "%d/20 corollary violations",
              lipschitz_bad, worst_jump, antisym_bad, corollary_bad)};
}

// 5. Subsidy pipeline with k = n.
Outcome subsidy_bounds() {
  int bad = 0;
  double worst_envy = 0.0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const int n = 2 + static_cast<int>(seed % 3);
    const int m = 5 + static_cast<int>(seed % 6);
    const Instance inst = random_instance(kFamilies[seed % 4], n, m, seed);
    const PipelineResult p = run_pipeline(inst.valuations, n, NecklaceLayout::identity(m),
                                          search_for(seed), 64, seed);
    const SubsidyReport s = envy_free_with_subsidy(inst.valuations, p.rounding.coloring);
    bool ok = !has_positive_cycle(s.graph).positive;
    // Every envy inequality, recomputed from the oracles.
    for (int i = 0; i < n; ++i) {
      const double own = (*inst.valuations[i])(s.allocation.bundles[i]) + s.payments[i];
      for (int j = 0; j < n; ++j) {
        const double other = (*inst.valuations[i])(s.allocation.bundles[j]) + s.payments[j];
        worst_envy = std::max(worst_envy, other - own);
        if (other - own > kPaymentSlack) ok = false;
      }
    }
    const double d = disc_of_coloring(inst.valuations, n, p.rounding.coloring).value;
    double total = 0.0;
    for (double pi : s.payments) {
      total += pi;
      if (pi > d + kPaymentSlack) ok = false;
    }
    if (total > (n - 1) * d + kPaymentSlack) ok = false;
    if (!ok) ++bad;
  }
  return {bad == 0, fmt("%d/30 violations, largest residual envy %.3g", bad, worst_envy)};
}

// Payments p with p_i - p_j >= w(i, j) exist iff Bellman-Ford on the
// constraint graph settles within n rounds.
bool envy_freeable_by_search(const EnvyGraph& g) {
  const int n = g.size();
  std::vector<double> p(n, 0.0);
  for (int round = 0; round <= n; ++round) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j && g(i, j) + p[j] > p[i] + kPaymentSlack) {
          p[i] = g(i, j) + p[j];
          changed = true;
        }
      }
    }
    if (!changed) return true;
  }
  return false;
}

// 6. Three characterizations of envy-freeable allocations agree.
Outcome envy_freeable_equivalence() {
  int disagree = 0;
  int freeable = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const int n = 2 + static_cast<int>(seed % 3);
    const int m = 3 + static_cast<int>(seed % 6);
    const Instance inst = random_instance(kFamilies[seed % 4], n, m, seed);
    Rng rng(derive_seed(seed, 6));
    std::vector<Subset> bundles(n);
    for (int j = 0; j < m; ++j) bundles[rng.below(n)].insert(j);
    // Welfare-maximal under reassignment: no permutation does better.
    double own = 0.0;
    for (int i = 0; i < n; ++i) own += (*inst.valuations[i])(bundles[i]);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = own;
    do {
      double w = 0.0;
      for (int i = 0; i < n; ++i) w += (*inst.valuations[i])(bundles[perm[i]]);
      best = std::max(best, w);
    } while (std::next_permutation(perm.begin(), perm.end()));
    const bool welfare_max = !(best > own + kPaymentSlack);
    const EnvyGraph g = build_envy_graph(inst.valuations, Allocation{bundles, {}});
    const bool no_cycle = !has_positive_cycle(g).positive;
    const bool feasible = envy_freeable_by_search(g);
    if (welfare_max != no_cycle || no_cycle != feasible) ++disagree;
    freeable += feasible;
  }
  return {disagree == 0,
          fmt("%d/100 disagreements, %d envy-freeable allocations", disagree, freeable)};
}

FractionalVector random_point(int m, Rng& rng) {
  std::vector<double> x(m);
  for (double& xj : x) {
    const double u = rng.uniform();
    xj = u < 0.2 ? 0.0 : u < 0.3 ? 1.0 : rng.uniform();
  }
  return FractionalVector(std::move(x));
}

// 7. Exact multilinear extension against sampling, and affinity per coordinate.
Outcome multilinear_correctness() {
  int mc_bad = 0;
  double worst_ratio = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const int m = 4 + static_cast<int>(seed % 13);
    const Valuation v = random_instance(kFamilies[seed % 4], 1, m, seed).valuations[0];
    Rng rng(derive_seed(seed, 7));
    const FractionalVector x = random_point(m, rng);
    const double exact = eval_exact(*v, x);
    const McEstimate mc = eval_mc(*v, x, 100000, seed);
    const double gap = std::abs(mc.mean - exact);
    if (mc.half_width > 0.0) worst_ratio = std::max(worst_ratio, gap / mc.half_width);
    if (gap > 5.0 * mc.half_width) ++mc_bad;
  }
  int affine_bad = 0;
  double worst_affine = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const int m = 3 + static_cast<int>(seed % 14);
    const Valuation v = random_instance(kFamilies[seed % 4], 1, m, seed + 500).valuations[0];
    Rng rng(derive_seed(seed, 77));
    const FractionalVector x = random_point(m, rng);
    const int j = static_cast<int>(rng.below(m));
    auto with = [&](double value) {
      std::vector<double> y(x.values().begin(), x.values().end());
      y[j] = value;
      return eval_exact(*v, FractionalVector(std::move(y)));
    };
    const double a = rng.uniform();
    const double err = std::abs(with(a) - (a * with(1.0) + (1.0 - a) * with(0.0)));
    worst_affine = std::max(worst_affine, err);
    if (err > 1e-9) ++affine_bad;
  }
  return {mc_bad == 0 && affine_bad == 0,
          fmt("%d/100 sampling disagreements (largest gap %.2f half-widths), "
              "%d/100 affinity errors (largest %.2g)",
              mc_bad, worst_ratio, affine_bad, worst_affine)};
}

// 8. Empirical deviation frequencies against the McDiarmid tail.
Outcome mcdiarmid_direction() {
  const int m = 12;
  const int k = 3;
  Rng rng(8);
  std::vector<double> rows;
  for (int j = 0; j < m; ++j) {
    double a = rng.uniform();
    double b = rng.uniform();
    if (a > b) std::swap(a, b);
    rows.insert(rows.end(), {a, b - a, 1.0 - b});
  }
  const FractionalColoring chi(m, k, rows);
  const Instance inst = random_instance("table-random-lipschitz", 2, m, 8);
  const int rounds = 10000;
  std::vector<Coloring> draws;
  for (int r = 0; r < rounds; ++r) draws.push_back(round_once(chi, derive_seed(8, r)));
  int bad = 0;
  int checks = 0;
  double worst = -1.0;
  for (const Valuation& v : inst.valuations) {
    for (int l = 0; l < k; ++l) {
      const int t = chi.fractional_count(l);
      const double mu = eval_exact(*v, chi.column(l));
      for (double factor : {0.5, 1.0, 2.0}) {
        const double a = factor * std::sqrt(static_cast<double>(t));
        int hits = 0;
        for (const Coloring& c : draws) hits += std::abs((*v)(c.bundle(l)) - mu) >= a;
        const double p = std::min(1.0, mcdiarmid_tail(t, a, v->marginal_bound()));
        const double se = std::sqrt(p * (1.0 - p) / rounds);
        const double freq = static_cast<double>(hits) / rounds;
        worst = std::max(worst, freq - (p + 3.0 * se));
        ++checks;
        if (freq > p + 3.0 * se) ++bad;
      }
    }
  }
  return {bad == 0, fmt("%d/%d frequencies above tail + 3 SE (largest excess %.4f)", bad, checks,
                        worst)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"oracle equivalence", oracle_equivalence},
      {"rounding lemma", rounding_lemma},
      {"scaling shape", scaling_shape},
      {"transfer properties", transfer_properties},
      {"subsidy bounds", subsidy_bounds},
      {"envy-freeable equivalence", envy_freeable_equivalence},
      {"multilinear correctness", multilinear_correctness},
      {"McDiarmid tail direction", mcdiarmid_direction},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %zu (%s): %s: %s\n", i + 1, criteria[i].first,
                o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
