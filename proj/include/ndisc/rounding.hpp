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
#include <optional>
#include <thread>
#include <vector>

#include "ndisc/coloring.hpp"
#include "ndisc/error.hpp"
#include "ndisc/measures.hpp"
#include "ndisc/multilinear.hpp"
#include "ndisc/random.hpp"
#include "ndisc/valuations.hpp"

namespace ndisc {

// Constant in the reported bound sqrt(c * t * log(nk)).
inline constexpr double kBoundConstant = 2.0;

// Pr[|f(X) - E f(X)| >= a] <= 2 exp(-2 a^2 / (t L^2)) for f of t independent
// coordinates with bounded differences L.
inline double mcdiarmid_tail(double t, double a, double bound = 1.0) {
  if (!(t >= 1.0)) throw InputError("mcdiarmid_tail needs t >= 1");
  if (!(a >= 0.0)) throw InputError("mcdiarmid_tail needs a >= 0");
  return 2.0 * std::exp(-2.0 * a * a / (t * bound * bound));
}

// sqrt(c * t * log(nk)).
inline double predicted_bound(int t, int n, int k, double c = kBoundConstant) {
  const double nk = static_cast<double>(n) * k;
  return std::sqrt(c * t * std::max(0.0, std::log(nk)));
}

// Draws each item's color independently from its row of chi.
inline Coloring round_once(const FractionalColoring& chi, std::uint64_t seed) {
  Rng rng(seed);
  const int m = chi.item_count();
  const int k = chi.color_count();
  std::vector<int> colors(m);
  for (int j = 0; j < m; ++j) {
    const double u = rng.uniform();
    const auto row = chi.row(j);
    double cumulative = 0.0;
    int chosen = -1;
    int last_positive = 0;
    for (int l = 0; l < k; ++l) {
      if (row[l] <= 0.0) continue;
      last_positive = l;
      cumulative += row[l];
      if (u < cumulative) {
        chosen = l;
        break;
      }
    }
    colors[j] = chosen >= 0 ? chosen : last_positive;
  }
  return Coloring(k, std::move(colors));
}

struct RoundingReport {
  Coloring coloring;
  DiscrepancyValue realized;
  double realized_disc = 0.0;
  // mu[i] = F_i(chi_0).
  std::vector<double> mu;
  // max over agents of the spread of F_i across color columns.
  double column_spread = 0.0;
  int fractional_support = 0;  // t: largest per-color fractional count
  double bound_predicted = 0.0;
  std::uint64_t trials_used = 0;
  std::uint64_t best_trial = 0;
};

// Best of `trials` independent roundings by realized discrepancy; ties go to
// the lowest trial index. Trial r uses the stream derive_seed(seed, r).
inline RoundingReport round_best_of(const Profile& profile,
                                    const FractionalColoring& chi,
                                    std::uint64_t trials, std::uint64_t seed,
                                    int workers = 1) {
  const int m = profile_items(profile);
  if (trials < 1) throw InputError("round_best_of needs at least one trial");
  if (chi.item_count() != m) throw InputError("coloring size differs from m");
  const int n = static_cast<int>(profile.size());
  const int k = chi.color_count();

  RoundingReport report;
  report.mu.resize(n);
  std::vector<double> column_values(std::size_t(n) * k);
  for (int l = 0; l < k; ++l) {
    const FractionalVector x = chi.column(l);
    for (int i = 0; i < n; ++i) column_values[i * k + l] = eval_exact(*profile[i], x);
  }
  for (int i = 0; i < n; ++i) {
    report.mu[i] = column_values[i * k];
    const auto row = column_values.begin() + std::ptrdiff_t(i) * k;
    const auto [lo, hi] = std::minmax_element(row, row + k);
    report.column_spread = std::max(report.column_spread, *hi - *lo);
  }
  report.fractional_support = chi.max_fractional_per_color();
  report.bound_predicted = predicted_bound(report.fractional_support, n, k);

  std::vector<std::optional<std::pair<DiscrepancyValue, Coloring>>> results(trials);
  auto run_trial = [&](std::uint64_t r) {
    Coloring c = round_once(chi, derive_seed(seed, r));
    results[r].emplace(disc_of_coloring(profile, k, c), std::move(c));
  };
  workers = std::max(1, workers);
  if (workers == 1) {
    for (std::uint64_t r = 0; r < trials; ++r) run_trial(r);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::uint64_t r = w; r < trials; r += workers) run_trial(r);
      });
    }
  }

  std::uint64_t best = 0;
  for (std::uint64_t r = 1; r < trials; ++r) {
    if (results[r]->first.value < results[best]->first.value) best = r;
  }
  report.realized = results[best]->first;
  report.realized_disc = report.realized.value;
  report.coloring = results[best]->second;
  report.trials_used = trials;
  report.best_trial = best;
  return report;
}

}  // namespace ndisc
