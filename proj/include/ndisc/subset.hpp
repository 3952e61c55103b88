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

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "ndisc/error.hpp"

namespace ndisc {

// Largest supported item count. Subsets are single 64-bit masks.
inline constexpr int kMaxItems = 64;

// A subset of the items {0, ..., m-1}, stored as a bitmask. The encoding is
// canonical: two subsets are equal iff their masks are equal.
class Subset {
 public:
  constexpr Subset() = default;
  constexpr explicit Subset(std::uint64_t bits) : bits_(bits) {}
  Subset(std::initializer_list<int> items) {
    for (int j : items) insert(j);
  }

  static Subset of(const std::vector<int>& items) {
    Subset s;
    for (int j : items) s.insert(j);
    return s;
  }

  // {0, ..., m-1}.
  static constexpr Subset full(int m) {
    return Subset(m >= 64 ? ~std::uint64_t{0}
                          : (std::uint64_t{1} << m) - 1);
  }

  constexpr std::uint64_t bits() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr int size() const { return std::popcount(bits_); }

  constexpr bool contains(int j) const { return (bits_ >> j) & 1U; }

  void insert(int j) {
    check_index(j);
    bits_ |= std::uint64_t{1} << j;
  }
  void erase(int j) {
    check_index(j);
    bits_ &= ~(std::uint64_t{1} << j);
  }

  constexpr Subset with(int j) const {
    return Subset(bits_ | (std::uint64_t{1} << j));
  }
  constexpr Subset without(int j) const {
    return Subset(bits_ & ~(std::uint64_t{1} << j));
  }
  // Symmetric difference with {j}.
  constexpr Subset flipped(int j) const {
    return Subset(bits_ ^ (std::uint64_t{1} << j));
  }
  constexpr Subset complement(int m) const {
    return Subset(~bits_ & full(m).bits_);
  }

  // True iff every item index is < m.
  constexpr bool fits(int m) const { return (bits_ & ~full(m).bits_) == 0; }

  constexpr bool disjoint(Subset other) const {
    return (bits_ & other.bits_) == 0;
  }
  constexpr bool subset_of(Subset other) const {
    return (bits_ & ~other.bits_) == 0;
  }

  std::vector<int> items() const {
    std::vector<int> out;
    out.reserve(size());
    for (std::uint64_t b = bits_; b != 0; b &= b - 1) {
      out.push_back(std::countr_zero(b));
    }
    return out;
  }

  std::string to_string() const {
    std::string s = "{";
    bool first = true;
    for (int j : items()) {
      if (!first) s += ",";
      s += std::to_string(j);
      first = false;
    }
    return s + "}";
  }

  friend constexpr Subset operator|(Subset a, Subset b) {
    return Subset(a.bits_ | b.bits_);
  }
  friend constexpr Subset operator&(Subset a, Subset b) {
    return Subset(a.bits_ & b.bits_);
  }
  // Set difference.
  friend constexpr Subset operator-(Subset a, Subset b) {
    return Subset(a.bits_ & ~b.bits_);
  }
  friend constexpr bool operator==(Subset a, Subset b) = default;

 private:
  static void check_index(int j) {
    if (j < 0 || j >= kMaxItems) {
      throw InputError("item index " + std::to_string(j) +
                       " outside [0, 64)");
    }
  }

  std::uint64_t bits_ = 0;
};

// Scatters the low bits of `local` onto the positions listed in `positions`:
// bit s of `local` selects item positions[s].
inline Subset scatter_bits(std::uint64_t local, const std::vector<int>& positions) {
  std::uint64_t out = 0;
  for (std::size_t s = 0; local != 0; ++s, local >>= 1) {
    if (local & 1U) out |= std::uint64_t{1} << positions[s];
  }
  return Subset(out);
}

}  // namespace ndisc
