// Copyright 2026 The disent Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DISENT_RNG_HPP
#define DISENT_RNG_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string_view>

namespace disent {

/// Counter-based SplitMix64 generator with named, independently seeded
/// streams. All stochastic components draw from their own stream so that
/// changing how much randomness one component consumes never shifts the
/// values seen by another. Distribution helpers are implemented here instead
/// of relying on std::uniform_real_distribution and friends, whose outputs
/// differ between standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

  /// Derives the stream identified by (seed, label, index). Labels are hashed
  /// with FNV-1a; the index separates repeated uses of the same label (for
  /// example one stream per restart).
  static Rng stream(std::uint64_t seed, std::string_view label, std::uint64_t index = 0) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : label) {
      h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
      h *= 0x100000001b3ULL;
    }
    Rng rng(0);
    rng.state_ = mix(mix(seed + 0x9e3779b97f4a7c15ULL) ^ mix(h) ^ mix(index * 0xbf58476d1ce4e5b9ULL + 0x94d049bb133111ebULL));
    return rng;
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). The modulo bias is below 2^-50 for every n
  /// used in this project.
  int uniform_int(int n) {
    if (n <= 0) throw std::invalid_argument("Rng::uniform_int: n must be positive");
    return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
  }

  /// Standard normal via Box-Muller. Caches the spare deviate.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.28318530717958647692 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace disent

#endif
