// base/rng.h

// Copyright 2026  adaptlab authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef ADAPTLAB_BASE_RNG_H_
#define ADAPTLAB_BASE_RNG_H_

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace adaptlab {

/// Seeded generator with fully specified output. std::mt19937_64 is
/// standardized bit-for-bit; the std distributions are not, so the
/// conversions to real/int/normal values live here.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  /// Uniform integer in [0, n), rejection-sampled (no modulo bias).
  uint64_t UniformInt(uint64_t n);

  /// Standard normal via Box-Muller; the second variate is cached.
  double Normal();

  template <typename T>
  void Shuffle(std::span<T> items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(UniformInt(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Derives an independent stream seed from a parent seed and a salt
/// (splitmix64 finalizer over the combination).
uint64_t DeriveSeed(uint64_t seed, uint64_t salt);

/// FNV-1a over a string, for salting seeds with names.
uint64_t HashString(std::string_view s);

}  // namespace adaptlab

#endif  // ADAPTLAB_BASE_RNG_H_
