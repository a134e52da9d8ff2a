// Copyright 2026 The ctpomdp Authors
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

#ifndef CTPOMDP_RNG_HPP_
#define CTPOMDP_RNG_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace ctpomdp {

/// Deterministic random source. All distributions are implemented on top of
/// the raw engine output so that streams are reproducible across standard
/// library implementations (std:: distributions are only pinned down per
/// implementation, the mt19937_64 engine itself is pinned by the standard).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  int uniform_int(int n) {
    return static_cast<int>(static_cast<double>(n) * uniform());
  }

  /// Standard normal via Box-Muller (no cached spare, one value per call).
  double normal();

  /// Exponential waiting time with the given rate (> 0).
  double exponential(double rate);

  /// Index sampled proportionally to the (nonnegative) weights.
  /// Weights need not be normalized; their sum must be positive.
  int categorical(std::span<const double> weights);

  /// Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 handled by boosting.
  double gamma(double shape);

  /// Symmetric Dirichlet sample of dimension n with concentration alpha.
  std::vector<double> dirichlet(double alpha, int n);

 private:
  std::mt19937_64 engine_;
};

/// Derives an independent child seed from a master seed and a stream index
/// (splitmix64 of the combined word). Used to fan out per-episode seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace ctpomdp

#endif  // CTPOMDP_RNG_HPP_
