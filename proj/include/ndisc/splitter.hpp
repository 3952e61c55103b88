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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ndisc/coloring.hpp"
#include "ndisc/error.hpp"
#include "ndisc/multilinear.hpp"
#include "ndisc/random.hpp"
#include "ndisc/valuations.hpp"

namespace ndisc {

// Placement of the items on [0, 1]: the item at position p occupies
// [p/m, (p+1)/m].
struct NecklaceLayout {
  std::vector<int> order;

  static NecklaceLayout identity(int m) {
    NecklaceLayout l;
    l.order.resize(m);
    std::iota(l.order.begin(), l.order.end(), 0);
    return l;
  }

  static NecklaceLayout shuffled(int m, std::uint64_t seed) {
    NecklaceLayout l = identity(m);
    Rng rng(seed);
    rng.shuffle(l.order);
    return l;
  }

  int item_count() const { return static_cast<int>(order.size()); }

  void validate() const {
    std::vector<bool> seen(order.size(), false);
    for (int j : order) {
      if (j < 0 || j >= item_count() || seen[j]) {
        throw InputError("necklace order is not a permutation of the items");
      }
      seen[j] = true;
    }
  }
};

// Sorted cut positions and one color label per piece. Repeated cuts give
// length-zero pieces, which do not affect the coloring.
struct CutVector {
  std::vector<double> cuts;
  std::vector<int> labels;
  int color_count = 2;

  int piece_count() const { return static_cast<int>(labels.size()); }

  void validate() const {
    if (color_count < 1) throw InputError("need at least one color");
    if (labels.size() != cuts.size() + 1) {
      throw InputError("need exactly one label per piece");
    }
    for (std::size_t c = 0; c < cuts.size(); ++c) {
      if (!(cuts[c] >= 0.0 && cuts[c] <= 1.0)) throw InputError("cut outside [0, 1]");
      if (c > 0 && cuts[c] < cuts[c - 1]) throw InputError("cuts must be sorted");
    }
    for (int l : labels) {
      if (l < 0 || l >= color_count) throw InputError("piece label outside [0, k)");
    }
  }
};

// Each color may own at most floor(n(k-1)/k) + 1 maximal intervals.
inline int interval_cap(int n, int k) { return n * (k - 1) / k + 1; }

// Number of maximal intervals of each color, ignoring length-zero pieces.
inline std::vector<int> intervals_per_color(const CutVector& cv) {
  std::vector<int> count(cv.color_count, 0);
  int previous = -1;
  for (int p = 0; p < cv.piece_count(); ++p) {
    const double begin = p == 0 ? 0.0 : cv.cuts[p - 1];
    const double end = p + 1 == cv.piece_count() ? 1.0 : cv.cuts[p];
    if (end <= begin) continue;
    if (cv.labels[p] != previous) ++count[cv.labels[p]];
    previous = cv.labels[p];
  }
  return count;
}

inline bool respects_interval_cap(const CutVector& cv, int n) {
  const int cap = interval_cap(n, cv.color_count);
  for (int c : intervals_per_color(cv)) {
    if (c > cap) return false;
  }
  return true;
}

// chi[j][l] = m * |interval of item j intersected with the pieces labeled l|.
inline FractionalColoring cuts_to_coloring(const NecklaceLayout& layout,
                                           const CutVector& cv) {
  const int m = layout.item_count();
  const int k = cv.color_count;
  std::vector<double> chi(std::size_t(m) * k, 0.0);
  const double md = m;
  for (int p = 0; p < cv.piece_count(); ++p) {
    const double begin = p == 0 ? 0.0 : cv.cuts[p - 1];
    const double end = p + 1 == cv.piece_count() ? 1.0 : cv.cuts[p];
    if (end <= begin) continue;
    const int first = std::max(0, static_cast<int>(std::floor(begin * md)) - 1);
    const int last = std::min(m - 1, static_cast<int>(std::ceil(end * md)));
    for (int pos = first; pos <= last; ++pos) {
      const double lo = pos / md;
      const double hi = (pos + 1) / md;
      const double overlap = std::min(end, hi) - std::max(begin, lo);
      if (overlap > 0.0) chi[layout.order[pos] * k + cv.labels[p]] += overlap * md;
    }
  }
  // Clamp rounding noise before the row checks.
  for (int j = 0; j < m; ++j) {
    double sum = 0.0;
    for (int l = 0; l < k; ++l) sum += chi[j * k + l];
    for (int l = 0; l < k; ++l) chi[j * k + l] = std::min(1.0, chi[j * k + l] / sum);
  }
  return FractionalColoring(m, k, std::move(chi));
}

struct SearchConfig {
  int restarts = 32;
  double tol = 1e-6;
  int max_rounds = 60;       // local-search rounds per restart
  int lm_iterations = 40;    // damped Newton steps per round
  std::uint64_t seed = 0;
  int workers = 1;
  bool stop_at_tol = true;   // skip remaining restarts once one converges
  bool record_trace = false;
};

struct SplitReport {
  FractionalColoring coloring;
  // max over agents i and colors l, l' of |F_i(chi_l) - F_i(chi_l')|.
  double imbalance = 0.0;
  int max_fractional_per_color = 0;
  int iterations = 0;  // accepted moves (pivots for the additive reducer)
  bool converged = false;
  std::optional<NecklaceLayout> layout;
  std::optional<CutVector> cuts;
  int restart_index = 0;
  int restarts_run = 0;
  // Incumbent imbalance after each accepted move of the winning restart.
  std::vector<double> trace;
};

namespace detail {

inline double imbalance_of(const std::vector<double>& values, int n, int k) {
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto row = values.begin() + std::ptrdiff_t(i) * k;
    const auto [lo, hi] = std::minmax_element(row, row + k);
    worst = std::max(worst, *hi - *lo);
  }
  return worst;
}

// Local search over cut vectors for one restart.
class NecklaceSearch {
 public:
  NecklaceSearch(const Profile& profile, int k, const NecklaceLayout& layout,
                 const SearchConfig& config)
      : profile_(profile),
        layout_(layout),
        config_(config),
        n_(static_cast<int>(profile.size())),
        k_(k),
        m_(layout.item_count()) {}

  struct State {
    CutVector cv;
    std::vector<double> values;  // n x k, F_i(chi_l)
    double imbalance = 0.0;
  };

  struct Outcome {
    State best;
    int accepted = 0;
    std::vector<double> trace;
  };

  Outcome run(CutVector start) {
    Outcome out;
    state_ = evaluate(std::move(start));
    trace_ = &out.trace;
    if (config_.record_trace) trace_->push_back(state_.imbalance);
    accepted_ = 0;

    for (int round = 0; round < config_.max_rounds; ++round) {
      if (done()) break;
      bool improved = newton_phase();
      if (done()) break;
      improved |= coordinate_sweep();
      if (done()) break;
      improved |= relabel_phase();
      if (!improved) break;
    }
    out.best = state_;
    out.accepted = accepted_;
    return out;
  }

  State evaluate(CutVector cv) const {
    State s;
    s.values.assign(std::size_t(n_) * k_, 0.0);
    const FractionalColoring chi = cuts_to_coloring(layout_, cv);
    for (int l = 0; l < k_; ++l) fill_column(chi, l, s.values);
    s.imbalance = imbalance_of(s.values, n_, k_);
    s.cv = std::move(cv);
    return s;
  }

 private:
  bool done() const { return state_.imbalance <= config_.tol; }

  void fill_column(const FractionalColoring& chi, int l,
                   std::vector<double>& values) const {
    const FractionalVector x = chi.column(l);
    for (int i = 0; i < n_; ++i) values[i * k_ + l] = eval_exact(*profile_[i], x);
  }

  // Re-evaluates only the listed colors of `base` under a new cut vector.
  State update(const State& base, CutVector cv, std::initializer_list<int> colors) const {
    State s{std::move(cv), base.values, 0.0};
    const FractionalColoring chi = cuts_to_coloring(layout_, s.cv);
    for (int l : colors) fill_column(chi, l, s.values);
    s.imbalance = imbalance_of(s.values, n_, k_);
    return s;
  }

  bool accept(State candidate) {
    if (!(candidate.imbalance < state_.imbalance)) return false;
    state_ = std::move(candidate);
    ++accepted_;
    if (config_.record_trace) trace_->push_back(state_.imbalance);
    return true;
  }

  double lower_limit(const CutVector& cv, int c) const {
    return c == 0 ? 0.0 : cv.cuts[c - 1];
  }
  double upper_limit(const CutVector& cv, int c) const {
    return c + 1 == static_cast<int>(cv.cuts.size()) ? 1.0 : cv.cuts[c + 1];
  }

  // Residuals F_i(chi_l) - F_i(chi_{k-1}) for l < k-1.
  Eigen::VectorXd residuals(const State& s) const {
    Eigen::VectorXd r(n_ * (k_ - 1));
    for (int i = 0; i < n_; ++i) {
      for (int l = 0; l + 1 < k_; ++l) {
        r(i * (k_ - 1) + l) = s.values[i * k_ + l] - s.values[i * k_ + k_ - 1];
      }
    }
    return r;
  }

  // Column c is the derivative of the residuals with respect to cut c. The
  // values are affine in a cut while it stays inside one item, so a one-sided
  // difference within the item is exact up to rounding. `sides[c]` picks the
  // side for cuts on an item boundary, where the two derivatives differ.
  Eigen::MatrixXd jacobian(const State& s, const std::vector<int>& sides) const {
    const int cuts = static_cast<int>(s.cv.cuts.size());
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n_ * (k_ - 1), cuts);
    const Eigen::VectorXd r0 = residuals(s);
    for (int c = 0; c < cuts; ++c) {
      const int left = s.cv.labels[c];
      const int right = s.cv.labels[c + 1];
      if (left == right) continue;
      const double x = s.cv.cuts[c];
      const double pos = std::min(std::floor(x * m_), m_ - 1.0);
      const double room_up = std::min((pos + 1) / m_, upper_limit(s.cv, c)) - x;
      const double item_lo = x * m_ == pos && pos > 0 ? (pos - 1) / m_ : pos / m_;
      const double room_down = x - std::max(item_lo, lower_limit(s.cv, c));
      double sign = sides[c] >= 0 ? 1.0 : -1.0;
      if ((sign > 0 ? room_up : room_down) <= 0.0) sign = -sign;
      const double room = sign > 0 ? room_up : room_down;
      if (room <= 0.0) continue;
      const double h = sign * std::min(1e-3 / m_, 0.5 * room);
      CutVector moved = s.cv;
      moved.cuts[c] = x + h;
      const State t = update(s, std::move(moved), {left, right});
      jac.col(c) = (residuals(t) - r0) / h;
    }
    return jac;
  }

  bool on_boundary(double x) const {
    const double scaled = x * m_;
    return scaled > 0.0 && scaled < m_ && scaled == std::floor(scaled);
  }

  // Scales `step` so the cuts stay sorted inside [0, 1].
  static double feasible_fraction(const CutVector& cv, const Eigen::VectorXd& step) {
    double alpha = 1.0;
    const int cuts = static_cast<int>(cv.cuts.size());
    for (int c = 0; c < cuts; ++c) {
      const double lo = 0.0 - cv.cuts[c];
      const double hi = 1.0 - cv.cuts[c];
      if (step(c) < lo) alpha = std::min(alpha, lo / step(c));
      if (step(c) > hi) alpha = std::min(alpha, hi / step(c));
      if (c + 1 < cuts) {
        const double gap = cv.cuts[c + 1] - cv.cuts[c];
        const double closing = step(c) - step(c + 1);
        if (closing > gap) alpha = std::min(alpha, gap / closing);
      }
    }
    return std::max(0.0, alpha);
  }

  // Candidate steps: the minimum-norm Newton step, then increasingly damped
  // Levenberg-Marquardt steps.
  std::vector<Eigen::VectorXd> newton_directions(const State& s) const {
    const Eigen::VectorXd r = residuals(s);
    std::vector<Eigen::VectorXd> out;
    std::vector<int> sides(s.cv.cuts.size(), 1);
    Eigen::MatrixXd jac;
    // Re-linearize boundary cuts on the side the step actually moves them.
    for (int pass = 0; pass < 4; ++pass) {
      jac = jacobian(s, sides);
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(jac);
      cod.setThreshold(1e-10);
      const Eigen::VectorXd newton = cod.solve(-r);
      if (!newton.allFinite()) break;
      bool flipped = false;
      for (std::size_t c = 0; c < sides.size(); ++c) {
        const int want = newton(c) > 0.0 ? 1 : (newton(c) < 0.0 ? -1 : sides[c]);
        if (want != sides[c] && on_boundary(s.cv.cuts[c])) {
          sides[c] = want;
          flipped = true;
        }
      }
      if (!flipped || pass == 3) {
        out.push_back(newton);
        break;
      }
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * r;
    for (double lambda : {1e-2, 1.0, 1e2}) {
      Eigen::MatrixXd damped = jtj;
      for (Eigen::Index c = 0; c < damped.rows(); ++c) {
        damped(c, c) += lambda * (jtj(c, c) + 1e-9);
      }
      const Eigen::VectorXd step = damped.ldlt().solve(-grad);
      if (step.allFinite()) out.push_back(step);
    }
    return out;
  }

  // Backtracking line search along `step` from `from`. Returns the first
  // candidate that beats `bar`.
  std::optional<State> line_search(const State& from, const Eigen::VectorXd& step,
                                   double bar) const {
    double alpha = feasible_fraction(from.cv, step);
    for (int half = 0; half < 10 && alpha > 1e-12; ++half, alpha *= 0.5) {
      CutVector moved = from.cv;
      for (std::size_t c = 0; c < moved.cuts.size(); ++c) {
        moved.cuts[c] = std::clamp(moved.cuts[c] + alpha * step(c), 0.0, 1.0);
      }
      for (std::size_t c = 1; c < moved.cuts.size(); ++c) {
        moved.cuts[c] = std::max(moved.cuts[c], moved.cuts[c - 1]);
      }
      State candidate = evaluate(std::move(moved));
      if (candidate.imbalance < bar) return candidate;
    }
    return std::nullopt;
  }

  std::optional<State> newton_step(const State& from, double bar) const {
    for (const Eigen::VectorXd& step : newton_directions(from)) {
      if (auto next = line_search(from, step, bar)) return next;
    }
    return std::nullopt;
  }

  // A length-zero piece can take any label without changing the coloring.
  // Steps that would push two cuts through each other become possible after
  // recoloring the collapsed piece between them.
  std::optional<State> collapsed_piece_step(const State& from) const {
    std::optional<State> best;
    for (int p = 0; p < from.cv.piece_count(); ++p) {
      const double begin = p == 0 ? 0.0 : from.cv.cuts[p - 1];
      const double end = p + 1 == from.cv.piece_count() ? 1.0 : from.cv.cuts[p];
      if (end > begin) continue;
      for (int l = 0; l < k_; ++l) {
        if (l == from.cv.labels[p]) continue;
        State relabeled = from;
        relabeled.cv.labels[p] = l;
        const double bar = best ? best->imbalance : from.imbalance;
        if (auto next = newton_step(relabeled, bar)) {
          if (respects_interval_cap(next->cv, n_)) best = std::move(next);
        }
      }
    }
    return best;
  }

  bool newton_phase() {
    if (state_.cv.cuts.empty()) return false;
    bool improved = false;
    for (int it = 0; it < config_.lm_iterations && !done(); ++it) {
      std::optional<State> next = newton_step(state_, state_.imbalance);
      if (!next) next = collapsed_piece_step(state_);
      if (!next || !accept(std::move(*next))) break;
      improved = true;
    }
    return improved;
  }

  // Moves each cut to the best position between its neighbours. Breakpoints
  // sit at item boundaries; between them the two affected columns are affine
  // in the cut, so the objective is convex on each segment and golden-section
  // search on the interpolated values is exact.
  bool coordinate_sweep() {
    bool improved = false;
    for (std::size_t c = 0; c < state_.cv.cuts.size() && !done(); ++c) {
      const int left = state_.cv.labels[c];
      const int right = state_.cv.labels[c + 1];
      if (left == right) continue;
      const double lo = lower_limit(state_.cv, static_cast<int>(c));
      const double hi = upper_limit(state_.cv, static_cast<int>(c));
      if (!(hi > lo)) continue;

      std::vector<double> points{lo};
      for (int b = static_cast<int>(std::floor(lo * m_)) + 1; b < m_; ++b) {
        const double z = static_cast<double>(b) / m_;
        if (z >= hi) break;
        if (z > lo) points.push_back(z);
      }
      points.push_back(hi);

      std::vector<State> at;
      at.reserve(points.size());
      for (double z : points) {
        CutVector moved = state_.cv;
        moved.cuts[c] = z;
        at.push_back(update(state_, std::move(moved), {left, right}));
      }

      double best_value = state_.imbalance;
      double best_z = state_.cv.cuts[c];
      for (std::size_t s = 0; s < points.size(); ++s) {
        if (at[s].imbalance < best_value) {
          best_value = at[s].imbalance;
          best_z = points[s];
        }
      }
      for (std::size_t s = 0; s + 1 < points.size(); ++s) {
        const auto [z, value] = golden_section(at[s], at[s + 1], points[s], points[s + 1],
                                               left, right);
        if (value < best_value) {
          best_value = value;
          best_z = z;
        }
      }
      if (best_z == state_.cv.cuts[c]) continue;
      CutVector moved = state_.cv;
      moved.cuts[c] = best_z;
      improved |= accept(update(state_, std::move(moved), {left, right}));
    }
    return improved;
  }

  std::pair<double, double> golden_section(const State& a, const State& b, double za,
                                           double zb, int left, int right) const {
    std::vector<double> values = a.values;
    auto objective = [&](double z) {
      const double w = (z - za) / (zb - za);
      for (int i = 0; i < n_; ++i) {
        for (int l : {left, right}) {
          const std::size_t idx = std::size_t(i) * k_ + l;
          values[idx] = (1.0 - w) * a.values[idx] + w * b.values[idx];
        }
      }
      return imbalance_of(values, n_, k_);
    };
    constexpr double kInvPhi = 0.6180339887498949;
    double lo = za;
    double hi = zb;
    double x1 = hi - kInvPhi * (hi - lo);
    double x2 = lo + kInvPhi * (hi - lo);
    double f1 = objective(x1);
    double f2 = objective(x2);
    for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
      if (f1 <= f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - kInvPhi * (hi - lo);
        f1 = objective(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + kInvPhi * (hi - lo);
        f2 = objective(x2);
      }
    }
    return f1 <= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
  }

  // Best single-piece recoloring that keeps every color under the interval cap.
  bool relabel_phase() {
    std::optional<State> best;
    for (int p = 0; p < state_.cv.piece_count(); ++p) {
      const int old = state_.cv.labels[p];
      for (int l = 0; l < k_; ++l) {
        if (l == old) continue;
        if (p > 0 && state_.cv.labels[p - 1] == l) continue;
        if (p + 1 < state_.cv.piece_count() && state_.cv.labels[p + 1] == l) continue;
        CutVector moved = state_.cv;
        moved.labels[p] = l;
        if (!respects_interval_cap(moved, n_)) continue;
        State s = update(state_, std::move(moved), {old, l});
        const double bar = best ? best->imbalance : state_.imbalance;
        if (s.imbalance < bar) best = std::move(s);
      }
    }
    return best ? accept(std::move(*best)) : false;
  }

  const Profile& profile_;
  const NecklaceLayout& layout_;
  const SearchConfig& config_;
  int n_;
  int k_;
  int m_;
  State state_;
  int accepted_ = 0;
  std::vector<double>* trace_ = nullptr;
};

// Cyclic labels with a random color permutation satisfy the interval cap;
// a few random single-piece recolorings that keep the cap add variety.
inline CutVector initial_cuts(int n, int k, int restart, std::uint64_t seed) {
  const int count = n * (k - 1);
  CutVector cv;
  cv.color_count = k;
  cv.cuts.resize(count);
  cv.labels.resize(count + 1);
  if (restart == 0) {
    for (int c = 0; c < count; ++c) cv.cuts[c] = (c + 1.0) / (count + 1.0);
    for (int p = 0; p <= count; ++p) cv.labels[p] = p % k;
    return cv;
  }
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(restart)));
  for (double& x : cv.cuts) x = rng.uniform();
  std::sort(cv.cuts.begin(), cv.cuts.end());
  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  for (int p = 0; p <= count; ++p) cv.labels[p] = perm[p % k];
  for (int tries = 0; tries < count; ++tries) {
    CutVector alt = cv;
    const std::size_t p = rng.below(alt.labels.size());
    alt.labels[p] = static_cast<int>(rng.below(k));
    if (p > 0 && alt.labels[p - 1] == alt.labels[p]) continue;
    if (p + 1 < alt.labels.size() && alt.labels[p + 1] == alt.labels[p]) continue;
    if (respects_interval_cap(alt, n)) cv = std::move(alt);
  }
  return cv;
}

}  // namespace detail

// Searches for n(k-1) cuts of the necklace whose k color classes have equal
// multilinear value for every agent. Existence is guaranteed for prime-power k
// but the search is heuristic: failure shows up as converged = false.
inline SplitReport split_necklace(const Profile& profile, int k,
                                  const NecklaceLayout& layout,
                                  const SearchConfig& config = {}) {
  const int m = profile_items(profile);
  const int n = static_cast<int>(profile.size());
  if (k < 2) throw InputError("split_necklace needs k >= 2");
  if (config.restarts < 1) throw InputError("need at least one restart");
  if (!(config.tol > 0.0)) throw InputError("tolerance must be positive");
  layout.validate();
  if (layout.item_count() != m) throw InputError("layout size differs from m");
  const int worst_support = std::min(m, 2 * interval_cap(n, k));
  if (worst_support > kMaxExactSupport) {
    throw CapacityError("a color could hold " + std::to_string(worst_support) +
                        " fractional items (n=" + std::to_string(n) +
                        ", k=" + std::to_string(k) + ", m=" + std::to_string(m) +
                        "), above the exact-evaluation cap of 24");
  }

  using Search = detail::NecklaceSearch;
  std::vector<std::optional<Search::Outcome>> outcomes(config.restarts);
  auto run_restart = [&](int r) {
    Search search(profile, k, layout, config);
    outcomes[r] = search.run(detail::initial_cuts(n, k, r, config.seed));
  };

  const int workers = std::max(1, config.workers);
  int finished = 0;
  while (finished < config.restarts) {
    const int batch = std::min(workers, config.restarts - finished);
    if (batch == 1) {
      run_restart(finished);
    } else {
      std::vector<std::jthread> pool;
      for (int r = finished; r < finished + batch; ++r) pool.emplace_back(run_restart, r);
    }
    finished += batch;
    if (config.stop_at_tol) {
      bool any = false;
      for (int r = 0; r < finished; ++r) any |= outcomes[r]->best.imbalance <= config.tol;
      if (any) break;
    }
  }

  int winner = 0;
  for (int r = 1; r < finished; ++r) {
    if (outcomes[r]->best.imbalance < outcomes[winner]->best.imbalance) winner = r;
  }
  Search::Outcome& best = *outcomes[winner];

  SplitReport report;
  report.coloring = cuts_to_coloring(layout, best.best.cv);
  report.imbalance = best.best.imbalance;
  report.max_fractional_per_color = report.coloring.max_fractional_per_color();
  report.iterations = best.accepted;
  report.converged = report.imbalance <= config.tol;
  report.layout = layout;
  report.cuts = best.best.cv;
  report.restart_index = winner;
  report.restarts_run = finished;
  report.trace = std::move(best.trace);
  return report;
}

// ---------------------------------------------------------------------------
// Additive valuations: linear-algebra reduction.

inline constexpr double kAdditiveTolerance = 1e-9;

// Starts from the uniform fractional coloring (every color has equal value)
// and repeatedly moves along the null space of the equal-value and row-sum
// constraints until a coordinate hits 0 or 1. When the null space is trivial
// at most n(k-1) items remain fractional.
inline SplitReport split_additive_exact(const Profile& profile, int k) {
  const int m = profile_items(profile);
  const int n = static_cast<int>(profile.size());
  if (k < 1) throw InputError("need at least one color");
  std::vector<const AdditiveValuation*> additive;
  for (const auto& v : profile) {
    const auto* a = dynamic_cast<const AdditiveValuation*>(v.get());
    if (!a) throw InputError("split_additive_exact needs additive valuations");
    additive.push_back(a);
  }

  std::vector<double> chi(std::size_t(m) * k, 1.0 / k);
  auto floating = [&](std::size_t idx) { return chi[idx] > 0.0 && chi[idx] < 1.0; };

  int pivots = 0;
  while (true) {
    std::vector<int> vars;
    for (std::size_t idx = 0; idx < chi.size(); ++idx) {
      if (floating(idx)) vars.push_back(static_cast<int>(idx));
    }
    if (vars.empty()) break;

    std::vector<int> rows;
    for (int j = 0; j < m; ++j) {
      for (int l = 0; l < k; ++l) {
        if (floating(std::size_t(j) * k + l)) {
          rows.push_back(j);
          break;
        }
      }
    }
    const int equal_rows = n * (k - 1);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(equal_rows + rows.size(), vars.size());
    for (std::size_t v = 0; v < vars.size(); ++v) {
      const int j = vars[v] / k;
      const int l = vars[v] % k;
      for (int i = 0; i < n; ++i) {
        const double w = additive[i]->weights()[j];
        if (l + 1 < k) a(i * (k - 1) + l, v) += w;
        if (l == k - 1) {
          for (int q = 0; q + 1 < k; ++q) a(i * (k - 1) + q, v) -= w;
        }
      }
      const auto row = std::find(rows.begin(), rows.end(), j) - rows.begin();
      a(equal_rows + row, v) = 1.0;
    }

    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    lu.setThreshold(1e-10);
    if (lu.rank() >= static_cast<Eigen::Index>(vars.size())) break;
    Eigen::VectorXd d = lu.kernel().col(0);
    d /= d.cwiseAbs().maxCoeff();

    double alpha = std::numeric_limits<double>::infinity();
    std::size_t blocking = 0;
    for (std::size_t v = 0; v < vars.size(); ++v) {
      const double x = chi[vars[v]];
      double limit = std::numeric_limits<double>::infinity();
      if (d(v) > 1e-14) limit = (1.0 - x) / d(v);
      if (d(v) < -1e-14) limit = x / -d(v);
      if (limit < alpha) {
        alpha = limit;
        blocking = v;
      }
    }
    if (!std::isfinite(alpha)) break;
    for (std::size_t v = 0; v < vars.size(); ++v) chi[vars[v]] += alpha * d(v);
    chi[vars[blocking]] = d(blocking) > 0 ? 1.0 : 0.0;
    for (double& x : chi) {
      if (x <= kSnapTolerance) x = 0.0;
      if (x >= 1.0 - kSnapTolerance) x = 1.0;
    }
    // A row left with a single floating entry is integral up to rounding.
    for (int j = 0; j < m; ++j) {
      int open = 0;
      double fixed = 0.0;
      int last = -1;
      for (int l = 0; l < k; ++l) {
        if (floating(std::size_t(j) * k + l)) {
          ++open;
          last = l;
        } else {
          fixed += chi[j * k + l];
        }
      }
      if (open == 1) chi[j * k + last] = std::round(1.0 - fixed);
    }
    ++pivots;
  }

  SplitReport report;
  report.coloring = FractionalColoring(m, k, std::move(chi));
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    std::vector<double> values(k, 0.0);
    for (int j = 0; j < m; ++j) {
      for (int l = 0; l < k; ++l) {
        values[l] += additive[i]->weights()[j] * report.coloring(j, l);
      }
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    worst = std::max(worst, *hi - *lo);
  }
  report.imbalance = worst;
  report.max_fractional_per_color = report.coloring.max_fractional_per_color();
  report.iterations = pivots;
  report.converged = worst <= kAdditiveTolerance;
  report.restarts_run = 1;
  return report;
}

}  // namespace ndisc
