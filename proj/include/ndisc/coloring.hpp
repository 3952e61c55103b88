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
#include <span>
#include <string>
#include <vector>

#include "ndisc/error.hpp"
#include "ndisc/multilinear.hpp"
#include "ndisc/subset.hpp"

namespace ndisc {

// Row sums of a fractional coloring must be 1 within this tolerance.
inline constexpr double kRowSumTolerance = 1e-9;

// An integral k-coloring: item j gets color color(j) in {0, ..., k-1}.
// Colors are zero-based throughout the library.
class Coloring {
 public:
  Coloring() = default;
  Coloring(int k, std::vector<int> colors) : k_(k), colors_(std::move(colors)) {
    if (k < 1) throw InputError("a coloring needs at least one color");
    if (colors_.empty() || colors_.size() > static_cast<std::size_t>(kMaxItems)) {
      throw InputError("coloring length must be in [1, 64]");
    }
    for (int c : colors_) {
      if (c < 0 || c >= k) {
        throw InputError("color " + std::to_string(c) + " outside [0, k)");
      }
    }
  }

  // Bundle i becomes color i. Bundles must partition {0, ..., m-1}.
  static Coloring from_bundles(int m, const std::vector<Subset>& bundles) {
    std::vector<int> colors(m, -1);
    for (std::size_t c = 0; c < bundles.size(); ++c) {
      if (!bundles[c].fits(m)) throw InputError("bundle references an item >= m");
      for (int j : bundles[c].items()) {
        if (colors[j] >= 0) throw InputError("bundles overlap");
        colors[j] = static_cast<int>(c);
      }
    }
    if (std::find(colors.begin(), colors.end(), -1) != colors.end()) {
      throw InputError("bundles do not cover every item");
    }
    return Coloring(static_cast<int>(bundles.size()), std::move(colors));
  }

  int item_count() const { return static_cast<int>(colors_.size()); }
  int color_count() const { return k_; }
  int operator[](int j) const { return colors_[j]; }
  const std::vector<int>& colors() const { return colors_; }

  Subset bundle(int color) const {
    Subset s;
    for (int j = 0; j < item_count(); ++j) {
      if (colors_[j] == color) s.insert(j);
    }
    return s;
  }

  std::vector<Subset> bundles() const {
    std::vector<Subset> out(k_);
    for (int j = 0; j < item_count(); ++j) out[colors_[j]].insert(j);
    return out;
  }

  friend bool operator==(const Coloring&, const Coloring&) = default;

 private:
  int k_ = 0;
  std::vector<int> colors_;
};

// An m x k row-stochastic matrix; row j is item j's distribution over colors
// and column l is the inclusion vector of color l.
class FractionalColoring {
 public:
  FractionalColoring() = default;
  FractionalColoring(int m, int k, std::vector<double> row_major)
      : m_(m), k_(k), chi_(std::move(row_major)) {
    if (m < 1 || m > kMaxItems) throw InputError("item count must be in [1, 64]");
    if (k < 1) throw InputError("need at least one color");
    if (chi_.size() != static_cast<std::size_t>(m) * k) {
      throw InputError("coloring matrix must have m*k entries");
    }
    for (int j = 0; j < m; ++j) {
      double sum = 0.0;
      for (int l = 0; l < k; ++l) {
        double& v = chi_[j * k + l];
        if (!std::isfinite(v) || v < -kSnapTolerance || v > 1.0 + kSnapTolerance) {
          throw InputError("coloring entry outside [0, 1]");
        }
        if (v <= kSnapTolerance) v = 0.0;
        if (v >= 1.0 - kSnapTolerance) v = 1.0;
        sum += v;
      }
      if (std::abs(sum - 1.0) > kRowSumTolerance) {
        throw InputError("row " + std::to_string(j) + " sums to " +
                         std::to_string(sum) + ", not 1");
      }
    }
  }

  static FractionalColoring uniform(int m, int k) {
    return FractionalColoring(m, k, std::vector<double>(std::size_t(m) * k, 1.0 / k));
  }

  static FractionalColoring from_coloring(const Coloring& c) {
    const int m = c.item_count();
    const int k = c.color_count();
    std::vector<double> chi(std::size_t(m) * k, 0.0);
    for (int j = 0; j < m; ++j) chi[j * k + c[j]] = 1.0;
    return FractionalColoring(m, k, std::move(chi));
  }

  int item_count() const { return m_; }
  int color_count() const { return k_; }
  double operator()(int j, int l) const { return chi_[j * k_ + l]; }
  std::span<const double> row(int j) const {
    return std::span<const double>(chi_).subspan(std::size_t(j) * k_, k_);
  }
  const std::vector<double>& data() const { return chi_; }

  FractionalVector column(int l) const {
    std::vector<double> x(m_);
    for (int j = 0; j < m_; ++j) x[j] = chi_[j * k_ + l];
    return FractionalVector(std::move(x));
  }

  int fractional_count(int l) const {
    int count = 0;
    for (int j = 0; j < m_; ++j) {
      const double v = chi_[j * k_ + l];
      if (v > 0.0 && v < 1.0) ++count;
    }
    return count;
  }

  int max_fractional_per_color() const {
    int best = 0;
    for (int l = 0; l < k_; ++l) best = std::max(best, fractional_count(l));
    return best;
  }

  // Items whose row is not a unit vector.
  int fractional_items() const {
    int count = 0;
    for (int j = 0; j < m_; ++j) {
      const auto r = row(j);
      if (std::none_of(r.begin(), r.end(), [](double v) { return v == 1.0; })) ++count;
    }
    return count;
  }

  bool is_integral() const { return fractional_items() == 0; }

 private:
  int m_ = 0;
  int k_ = 0;
  std::vector<double> chi_;
};

}  // namespace ndisc
