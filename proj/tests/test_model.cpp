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

#include "ctpomdp/model.hpp"

#include <stdexcept>
#include <string>

#include "ctpomdp/envs.hpp"
#include "ctpomdp/rng.hpp"
#include "doctest.h"

using namespace ctpomdp;

namespace {

// Two-state chain with a single transition 0 -> 1 at the given rate, one
// action, one observation.
PomdpModel two_state_chain(double rate) {
  PomdpModel m(2, 1, 1);
  m.rate(0, 0, 1) = rate;
  m.rate(0, 0, 0) = -rate;
  m.likelihood(0, 0, 0) = 1.0;
  m.likelihood(0, 1, 0) = 1.0;
  return m;
}

bool contains(const std::vector<std::string>& messages, const char* needle) {
  for (const auto& msg : messages)
    if (msg.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("validate accepts the bundled environments") {
  CHECK(envs::build_tiger().validate().empty());
  CHECK(envs::build_slotted_aloha().validate().empty());
  CHECK(envs::build_gridworld().validate().empty());
}

TEST_CASE("validate reports negative off-diagonal rates with indices") {
  auto m = envs::build_tiger();
  m.rate(0, 0, 1) = -1.0;
  m.rate(0, 0, 0) = 1.0;  // keep the row sum at zero
  const auto violations = m.validate();
  REQUIRE(!violations.empty());
  CHECK(contains(violations, "negative off-diagonal rate"));
  CHECK(contains(violations, "u=0 x=0"));
}

TEST_CASE("validate reports unnormalized likelihood rows") {
  auto m = envs::build_tiger();
  m.likelihood(0, 0, 0) = 0.75;  // row now sums to 0.9
  const auto violations = m.validate();
  REQUIRE(!violations.empty());
  CHECK(contains(violations, "likelihood row not normalized"));
}

TEST_CASE("validate reports broken generator rows") {
  auto m = envs::build_tiger();
  m.rate(1, 1, 0) = 0.5;  // off-diagonal without diagonal compensation
  CHECK(contains(m.validate(), "generator row does not sum to zero"));
}

TEST_CASE("exit_rate of the tiger is zero everywhere") {
  const auto m = envs::build_tiger();
  for (int x = 0; x < m.num_states; ++x)
    for (int u = 0; u < m.num_actions; ++u) CHECK(m.exit_rate(x, u) == 0.0);
}

TEST_CASE("exit_rate of a two-state chain is the single off-diagonal rate") {
  const auto m = two_state_chain(2.0);
  CHECK(m.exit_rate(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(m.exit_rate(1, 0) == 0.0);
}

TEST_CASE("exit_rate matches the off-diagonal row sum on aloha") {
  const auto m = envs::build_slotted_aloha();
  for (int u = 0; u < m.num_actions; ++u) {
    for (int x = 0; x < m.num_states; ++x) {
      double sum = 0.0;
      for (int to = 0; to < m.num_states; ++to)
        if (to != x) sum += m.rate(u, x, to);
      CHECK(m.exit_rate(x, u) == doctest::Approx(sum).epsilon(1e-14));
    }
  }
  // At capacity with rho = 1 every send event collides: only send events
  // fire and the exit rate is the full send rate.
  const int at_capacity_idle = 9 * 3 + 0;
  CHECK(m.exit_rate(at_capacity_idle, 0) == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("exit_rate rejects out-of-range indices") {
  const auto m = envs::build_tiger();
  CHECK_THROWS_AS(m.exit_rate(2, 0), std::out_of_range);
  CHECK_THROWS_AS(m.exit_rate(0, 3), std::out_of_range);
}

TEST_CASE("jump_distribution of a two-state chain is a point mass") {
  const auto m = two_state_chain(2.0);
  const auto dist = m.jump_distribution(0, 0);
  CHECK(dist[0] == 0.0);
  CHECK(dist[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("jump_distribution requires a positive exit rate") {
  const auto m = envs::build_tiger();
  CHECK_THROWS_AS(m.jump_distribution(0, 0), std::domain_error);
}

TEST_CASE("jump_distribution entries sum to one whenever defined") {
  const auto m = envs::build_slotted_aloha();
  for (int u = 0; u < m.num_actions; ++u) {
    for (int x = 0; x < m.num_states; ++x) {
      if (m.exit_rate(x, u) <= 0.0) continue;
      const auto dist = m.jump_distribution(x, u);
      double total = 0.0;
      for (double p : dist) total += p;
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(dist[static_cast<std::size_t>(x)] == 0.0);
    }
  }
}

TEST_CASE("gridworld jump distribution splits 0.7 / 0.1 in the interior") {
  const auto m = envs::build_gridworld();
  envs::GridworldLayout layout;
  // (2,1) has all four neighbors valid.
  const int cell = layout.cell_index(2, 1);
  const auto dist = m.jump_distribution(cell, 0);  // up
  CHECK(dist[static_cast<std::size_t>(layout.cell_index(2, 2))] ==
        doctest::Approx(0.7).epsilon(1e-12));
  CHECK(dist[static_cast<std::size_t>(layout.cell_index(2, 0))] ==
        doctest::Approx(0.1).epsilon(1e-12));
  CHECK(dist[static_cast<std::size_t>(layout.cell_index(1, 1))] ==
        doctest::Approx(0.1).epsilon(1e-12));
  CHECK(dist[static_cast<std::size_t>(layout.cell_index(3, 1))] ==
        doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("gridworld renormalizes around invalid neighbors") {
  const auto m = envs::build_gridworld();
  envs::GridworldLayout layout;
  // (0,1): left is off-grid, the other three moves are valid; the weights
  // (0.7, 0.1, 0.1) renormalize over 0.9.
  const int cell = layout.cell_index(0, 1);
  const auto dist = m.jump_distribution(cell, 0);  // up
  CHECK(dist[static_cast<std::size_t>(layout.cell_index(0, 2))] ==
        doctest::Approx(0.7 / 0.9).epsilon(1e-12));
  CHECK(dist[static_cast<std::size_t>(layout.cell_index(0, 0))] ==
        doctest::Approx(0.1 / 0.9).epsilon(1e-12));
  CHECK(dist[static_cast<std::size_t>(layout.cell_index(1, 1))] ==
        doctest::Approx(0.1 / 0.9).epsilon(1e-12));
}

TEST_CASE("expected_reward evaluates the tiger rewards") {
  const auto m = envs::build_tiger();
  const Belief tiger_left{1.0, 0.0};
  CHECK(m.expected_reward(tiger_left, 2) == doctest::Approx(0.1).epsilon(1e-15));
  const Belief uncertain{0.5, 0.5};
  CHECK(m.expected_reward(uncertain, 1) ==
        doctest::Approx(-0.45).epsilon(1e-15));
}

TEST_CASE("expected_reward of a constant reward is that constant") {
  auto m = envs::build_tiger();
  for (auto& r : m.reward_rate) r = 0.3;
  Rng rng(7);
  for (int i = 0; i < 20; ++i) {
    const double a = rng.uniform();
    const Belief b{a, 1.0 - a};
    for (int u = 0; u < m.num_actions; ++u)
      CHECK(m.expected_reward(b, u) == doctest::Approx(0.3).epsilon(1e-15));
  }
}

TEST_CASE("expected_reward is linear in the belief") {
  const auto m = envs::build_slotted_aloha();
  Rng rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    const Belief p(rng.dirichlet(0.5, m.num_states));
    const Belief q(rng.dirichlet(0.5, m.num_states));
    const double alpha = rng.uniform();
    Belief mix(m.num_states);
    for (int x = 0; x < m.num_states; ++x)
      mix[x] = alpha * p[x] + (1.0 - alpha) * q[x];
    for (int u = 0; u < m.num_actions; ++u) {
      const double lhs = m.expected_reward(mix, u);
      const double rhs = alpha * m.expected_reward(p, u) +
                         (1.0 - alpha) * m.expected_reward(q, u);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }
}

TEST_CASE("model JSON round-trips exactly") {
  const auto m = envs::build_slotted_aloha();
  const auto text = model_to_json(m);
  const auto loaded = model_from_json(text);
  CHECK(loaded.num_states == m.num_states);
  CHECK(loaded.num_actions == m.num_actions);
  CHECK(loaded.num_observations == m.num_observations);
  CHECK(loaded.rates == m.rates);
  CHECK(loaded.obs_likelihood == m.obs_likelihood);
  CHECK(loaded.obs_rate == m.obs_rate);
  CHECK(loaded.reward_rate == m.reward_rate);
  CHECK(loaded.discount == m.discount);
  CHECK(loaded.labels.states == m.labels.states);
  CHECK(model_to_json(loaded) == text);
}

TEST_CASE("model JSON rejects malformed input") {
  CHECK_THROWS_AS(model_from_json("{}"), std::invalid_argument);
  CHECK_THROWS_AS(model_from_json("{\"num_states\": 2}"), std::invalid_argument);
}

TEST_CASE("belief clip_and_normalize repairs round-off") {
  Belief b{1.0000000001, -1e-13};
  b.clip_and_normalize();
  CHECK(b.on_simplex(1e-12));
  CHECK(b[1] == 0.0);
  Belief zero{0.0, 0.0};
  CHECK_THROWS(zero.clip_and_normalize());
}

TEST_CASE("constant policy returns its action") {
  ConstantPolicy policy(2);
  CHECK(policy.action(Belief{0.5, 0.5}, 0.0) == 2);
  CHECK(policy.action(Belief{1.0, 0.0}, 3.7) == 2);
}
