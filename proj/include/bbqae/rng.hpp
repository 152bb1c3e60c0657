// Copyright 2026 The bbqae developers
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

#pragma once

#include <cmath>
#include <cstdint>

#include "bbqae/common.hpp"

namespace bbqae {

/// Counter-based deterministic generator (SplitMix64). Output i is
/// mix64(seed + (i+1)*GAMMA) with the standard SplitMix64 finalizer, so a
/// stream is a pure function of (seed, counter) and substreams derived via
/// fork() are reproducible across platforms and thread counts.
///
/// Uniform doubles take the top 53 bits of a draw; normals use the Marsaglia
/// polar method (no trigonometry, only sqrt/log).
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  static uint64_t mix64(uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  uint64_t next_u64() {
    state_ += kGamma;
    return mix64(state_);
  }

  /// Derives an independent substream keyed by `stream`. Does not advance
  /// this generator.
  Rng fork(uint64_t stream) const {
    return Rng(mix64(state_ ^ mix64(stream + kGamma)));
  }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  Complex complex_normal() {
    const double re = normal();
    const double im = normal();
    return Complex(re, im);
  }

 private:
  static constexpr uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// Stable seed derivation for named experiment substreams.
inline uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
  uint64_t s = Rng::mix64(base ^ 0x5851f42d4c957f2dULL);
  s = Rng::mix64(s ^ Rng::mix64(a + 0x14057b7ef767814fULL));
  s = Rng::mix64(s ^ Rng::mix64(b + 0x27bb2ee687b0b0fdULL));
  s = Rng::mix64(s ^ Rng::mix64(c + 0xb504f333f9de6484ULL));
  return s;
}

}  // namespace bbqae
