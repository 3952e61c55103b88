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

// Splits a small coverage instance among three agents, rounds it, and pays
// subsidies so the resulting allocation is envy-free.

#include <cstdio>

#include "ndisc.hpp"

int main() {
  const int n = 3;
  const int m = 9;
  const ndisc::Instance inst = ndisc::random_instance("coverage", n, m, /*seed=*/11);

  ndisc::SearchConfig search;
  search.seed = 5;
  const ndisc::SplitReport split =
      ndisc::split_necklace(inst.valuations, n, ndisc::NecklaceLayout::identity(m), search);
  std::printf("split: imbalance %.3g, converged %s, %d fractional items per color\n",
              split.imbalance, split.converged ? "yes" : "no", split.max_fractional_per_color);

  const ndisc::RoundingReport rounded =
      ndisc::round_best_of(inst.valuations, split.coloring, /*trials=*/64, /*seed=*/7);
  std::printf("rounding: discrepancy %.4f (prediction %.4f)\n", rounded.realized_disc,
              rounded.bound_predicted);

  const ndisc::SubsidyReport subsidy =
      ndisc::envy_free_with_subsidy(inst.valuations, rounded.coloring);
  for (int i = 0; i < n; ++i) {
    std::printf("agent %d gets %-14s payment %.4f\n", i,
                subsidy.allocation.bundles[i].to_string().c_str(), subsidy.payments[i]);
  }
  std::printf("total subsidy %.4f, bound (n-1)*disc = %.4f\n", subsidy.total_subsidy,
              (n - 1) * subsidy.disc.value);
  return 0;
}
