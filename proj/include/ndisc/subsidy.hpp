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
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "ndisc/coloring.hpp"
#include "ndisc/error.hpp"
#include "ndisc/measures.hpp"
#include "ndisc/valuations.hpp"

namespace ndisc {

// Slack for every envy-freeness and bound inequality on real-valued oracles.
inline constexpr double kPaymentSlack = 1e-9;

// bundles[i] is agent i's bundle; together they partition the items.
struct Allocation {
  std::vector<Subset> bundles;
  // Allocated bundle i is input bundle assignment[i].
  std::vector<int> assignment;
};

inline void check_partition(int m, const std::vector<Subset>& bundles) {
  Subset seen;
  for (Subset b : bundles) {
    if (!b.fits(m)) throw InputError("bundle references an item >= m");
    if (!b.disjoint(seen)) throw InputError("bundles overlap");
    seen = seen | b;
  }
  if (seen != Subset::full(m)) throw InputError("bundles do not cover every item");
}

// Square matrix in row-major order.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(int n, double fill = 0.0)
      : n_(n), data_(std::size_t(n) * n, fill) {}
  int size() const { return n_; }
  double& operator()(int i, int j) { return data_[std::size_t(i) * n_ + j]; }
  double operator()(int i, int j) const { return data_[std::size_t(i) * n_ + j]; }

 private:
  int n_ = 0;
  std::vector<double> data_;
};

namespace detail {

// Hungarian algorithm (potentials, O(n^3)) for a minimum-cost perfect matching
// between rows and columns. Returns column of each row.
inline std::vector<int> min_cost_assignment(const SquareMatrix& cost) {
  const int n = cost.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = match[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n);
  for (int j = 1; j <= n; ++j) row_to_col[match[j] - 1] = j - 1;
  return row_to_col;
}

inline double max_welfare(const SquareMatrix& value) {
  const int n = value.size();
  if (n == 0) return 0.0;
  SquareMatrix cost(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) cost(i, j) = -value(i, j);
  }
  const std::vector<int> sigma = min_cost_assignment(cost);
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += value(i, sigma[i]);
  return total;
}

inline SquareMatrix value_matrix(const Profile& profile,
                                 const std::vector<Subset>& bundles) {
  const int n = static_cast<int>(profile.size());
  SquareMatrix value(n);
  for (int i = 0; i < n; ++i) {
    for (int b = 0; b < n; ++b) value(i, b) = profile[i]->value(bundles[b]);
  }
  return value;
}

}  // namespace detail

inline bool welfare_ties(double a, double b) {
  return std::abs(a - b) <= kPaymentSlack * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

// The assignment of bundles to agents maximizing sum_i v_i(bundle of i).
// Among optimal assignments the lexicographically smallest is returned: each
// agent in turn takes the smallest bundle index that still completes to an
// optimum.
inline Allocation best_reassignment(const Profile& profile,
                                    const std::vector<Subset>& bundles) {
  const int m = profile_items(profile);
  const int n = static_cast<int>(profile.size());
  if (static_cast<int>(bundles.size()) != n) {
    throw InputError("need exactly one bundle per agent");
  }
  check_partition(m, bundles);
  const SquareMatrix value = detail::value_matrix(profile, bundles);
  const double optimum = detail::max_welfare(value);

  std::vector<int> sigma(n, -1);
  std::vector<bool> taken(n, false);
  double prefix = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int b = 0; b < n; ++b) {
      if (taken[b]) continue;
      // Optimal completion for agents i+1.. over the bundles still free.
      std::vector<int> free_bundles;
      for (int c = 0; c < n; ++c) {
        if (!taken[c] && c != b) free_bundles.push_back(c);
      }
      const int rest = n - i - 1;
      SquareMatrix sub(rest);
      for (int a = 0; a < rest; ++a) {
        for (int c = 0; c < rest; ++c) sub(a, c) = value(i + 1 + a, free_bundles[c]);
      }
      const double total = prefix + value(i, b) + detail::max_welfare(sub);
      if (welfare_ties(total, optimum) || total > optimum) {
        sigma[i] = b;
        break;
      }
    }
    if (sigma[i] < 0) throw ContractViolation("assignment tie-breaking lost the optimum");
    taken[sigma[i]] = true;
    prefix += value(i, sigma[i]);
  }

  Allocation alloc;
  alloc.assignment = sigma;
  for (int i = 0; i < n; ++i) alloc.bundles.push_back(bundles[sigma[i]]);
  return alloc;
}

// w(i, j) = v_i(A_j) - v_i(A_i).
using EnvyGraph = SquareMatrix;

inline EnvyGraph build_envy_graph(const Profile& profile, const Allocation& alloc) {
  const int m = profile_items(profile);
  const int n = static_cast<int>(profile.size());
  if (static_cast<int>(alloc.bundles.size()) != n) {
    throw InputError("need exactly one bundle per agent");
  }
  check_partition(m, alloc.bundles);
  const SquareMatrix value = detail::value_matrix(profile, alloc.bundles);
  EnvyGraph w(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) w(i, j) = i == j ? 0.0 : value(i, j) - value(i, i);
  }
  return w;
}

struct CycleCheck {
  bool positive = false;
  std::vector<int> cycle;  // agents in order; the arc back to cycle[0] closes it
  double weight = 0.0;
};

// Detects a directed cycle of weight > kPaymentSlack by Bellman-Ford on the
// negated weights from a virtual source joined to every vertex.
inline CycleCheck has_positive_cycle(const EnvyGraph& g) {
  const int n = g.size();
  std::vector<double> dist(n, 0.0);
  std::vector<int> pred(n, -1);
  int changed = -1;
  for (int pass = 0; pass < n; ++pass) {
    changed = -1;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const double candidate = dist[i] - g(i, j);
        if (candidate < dist[j] - kPaymentSlack) {
          dist[j] = candidate;
          pred[j] = i;
          changed = j;
        }
      }
    }
    if (changed < 0) return {};
  }
  // Still relaxing after n passes: walk back n steps to land on the cycle.
  int x = changed;
  for (int step = 0; step < n; ++step) x = pred[x];
  CycleCheck out;
  out.positive = true;
  std::vector<int> back{x};
  for (int y = pred[x]; y != x; y = pred[y]) {
    if (y < 0 || back.size() > static_cast<std::size_t>(n)) {
      throw ContractViolation("predecessor walk left the envy cycle");
    }
    back.push_back(y);
  }
  out.cycle.assign(back.rbegin(), back.rend());
  for (std::size_t s = 0; s < out.cycle.size(); ++s) {
    out.weight += g(out.cycle[s], out.cycle[(s + 1) % out.cycle.size()]);
  }
  return out;
}

// p_i = maximum weight of a path starting at i (the empty path counts, so
// p_i >= 0). Longest paths are well defined because no cycle is positive.
inline std::vector<double> compute_payments(const EnvyGraph& g) {
  if (has_positive_cycle(g).positive) {
    throw ContractViolation("envy graph has a positive-weight cycle; no payments exist");
  }
  const int n = g.size();
  std::vector<double> p(n, 0.0);
  for (int pass = 0; pass < n; ++pass) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const double candidate = g(i, j) + p[j];
        if (candidate > p[i]) {
          p[i] = candidate;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  return p;
}

// Largest violation of v_i(A_i) + p_i >= v_i(A_j) + p_j (0 when envy-free).
inline double max_envy_after_payments(const EnvyGraph& g, const std::vector<double>& p) {
  double worst = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    for (int j = 0; j < g.size(); ++j) worst = std::max(worst, g(i, j) + p[j] - p[i]);
  }
  return worst;
}

struct SubsidyReport {
  Allocation allocation;
  EnvyGraph graph;
  std::vector<double> payments;
  DiscrepancyValue disc;  // of the input coloring, with k = n
  double total_subsidy = 0.0;
  double max_payment = 0.0;
  double max_envy = 0.0;  // after payments
  bool per_agent_bound_holds = false;  // every p_i <= D
  bool total_bound_holds = false;      // sum p <= (n - 1) D
};

// Turns an n-coloring into an envy-free allocation with payments: reassign the
// color classes to maximize welfare, then pay each agent its longest envy path.
inline SubsidyReport envy_free_with_subsidy(const Profile& profile, const Coloring& coloring) {
  const int m = profile_items(profile);
  const int n = static_cast<int>(profile.size());
  if (coloring.item_count() != m) throw InputError("coloring length differs from m");
  if (coloring.color_count() != n) {
    throw InputError("subsidy pipeline needs exactly one color per agent");
  }
  SubsidyReport report;
  report.disc = disc_of_coloring(profile, n, coloring);
  report.allocation = best_reassignment(profile, coloring.bundles());
  report.graph = build_envy_graph(profile, report.allocation);
  const CycleCheck cycle = has_positive_cycle(report.graph);
  if (cycle.positive) {
    throw ContractViolation("positive envy cycle after welfare-maximizing reassignment");
  }
  report.payments = compute_payments(report.graph);
  for (double p : report.payments) {
    report.total_subsidy += p;
    report.max_payment = std::max(report.max_payment, p);
  }
  report.max_envy = max_envy_after_payments(report.graph, report.payments);
  const double d = report.disc.value;
  report.per_agent_bound_holds = report.max_payment <= d + kPaymentSlack;
  report.total_bound_holds = report.total_subsidy <= (n - 1) * d + kPaymentSlack;
  return report;
}

}  // namespace ndisc
