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

#ifndef CTPOMDP_TESTS_SUPPORT_RANDOM_MODELS_HPP_
#define CTPOMDP_TESTS_SUPPORT_RANDOM_MODELS_HPP_

#include <cstdint>

#include "ctpomdp/model.hpp"
#include "ctpomdp/rng.hpp"

namespace test_support {

struct RandomModelParams {
  double rate_lo = 0.3;
  double rate_hi = 0.9;
  double obs_rate = 2.0;
  double like_floor = 0.2;  // keeps likelihood rows away from degenerate
  double discount = 0.9;
};

// Seeded dense random model: all off-diagonal rates positive, likelihood
// rows bounded away from zero, rewards in [-1, 1].
inline ctpomdp::PomdpModel random_model(int states, int actions, int obs,
                                        std::uint64_t seed,
                                        const RandomModelParams& p = {}) {
  ctpomdp::Rng rng(seed);
  ctpomdp::PomdpModel m(states, actions, obs);
  for (int u = 0; u < actions; ++u) {
    for (int x = 0; x < states; ++x) {
      double exit = 0.0;
      for (int to = 0; to < states; ++to) {
        if (to == x) continue;
        const double r = rng.uniform(p.rate_lo, p.rate_hi);
        m.rate(u, x, to) = r;
        exit += r;
      }
      m.rate(u, x, x) = -exit;
      double total = 0.0;
      for (int y = 0; y < obs; ++y) {
        const double w = rng.uniform(p.like_floor, 1.0);
        m.likelihood(u, x, y) = w;
        total += w;
      }
      for (int y = 0; y < obs; ++y) m.likelihood(u, x, y) /= total;
      m.reward(u, x) = rng.uniform(-1.0, 1.0);
    }
    m.obs_rate[static_cast<std::size_t>(u)] = p.obs_rate;
  }
  m.discount = p.discount;
  return m;
}

// Same dynamics, constant reward rate c for every (x, u).
inline ctpomdp::PomdpModel constant_reward_model(int states, int actions,
                                                 int obs, double c,
                                                 std::uint64_t seed,
                                                 const RandomModelParams& p = {}) {
  auto m = random_model(states, actions, obs, seed, p);
  for (auto& r : m.reward_rate) r = c;
  return m;
}

}  // namespace test_support

#endif  // CTPOMDP_TESTS_SUPPORT_RANDOM_MODELS_HPP_
