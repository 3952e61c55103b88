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

#include <cmath>
#include <cstdint>
#include <random>

namespace ndisc {

// SplitMix64 finalizer. Used to derive independent stream seeds from a base
// seed and a stream index.
inline constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t derive_seed(std::uint64_t base,
                                           std::uint64_t stream) {
  return mix_seed(mix_seed(base) ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

// Mersenne Twister with platform-independent conversions. The standard
// distributions are implementation-defined, so generated instances would not
// reproduce across standard libraries if we used them.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform in {0, ..., n-1}; n >= 1.
  std::uint64_t below(std::uint64_t n) {
    // Lemire's multiply-shift with rejection.
    std::uint64_t x = engine_();
    unsigned __int128 p = static_cast<unsigned __int128>(x) * n;
    auto low = static_cast<std::uint64_t>(p);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        x = engine_();
        p = static_cast<unsigned __int128>(x) * n;
        low = static_cast<std::uint64_t>(p);
      }
    }
    return static_cast<std::uint64_t>(p >> 64);
  }

  bool bernoulli(double p) { return uniform() < p; }

  template <typename Range>
  void shuffle(Range& r) {
    for (std::size_t i = r.size(); i > 1; --i) {
      std::swap(r[i - 1], r[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Rounds to the 2^-20 grid. Sums of up to 2^32 grid values in [-1, 1] are
// exact in double precision, so marginals of generated instances carry no
// rounding error.
inline double to_grid(double x) { return std::round(x * 0x1.0p20) * 0x1.0p-20; }
inline double to_grid_floor(double x) {
  return std::floor(x * 0x1.0p20) * 0x1.0p-20;
}

}  // namespace ndisc
