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

#include "ctpomdp/sim.hpp"

#include <stdexcept>
#include <cmath>

#include "ctpomdp/envs.hpp"
#include "doctest.h"
#include "support/ks.hpp"
#include "support/random_models.hpp"

using namespace ctpomdp;
using namespace ctpomdp::sim;

namespace {

Belief uniform2(Rng&) { return Belief::uniform(2); }

// One action, constant exit rate q from state 0: waiting times are Exp(q).
PomdpModel homogeneous_rate_model(double q) {
  PomdpModel m(2, 1, 1);
  m.rate(0, 0, 1) = q;
  m.rate(0, 0, 0) = -q;
  m.likelihood(0, 0, 0) = 1.0;
  m.likelihood(0, 1, 0) = 1.0;
  return m;
}

// Two actions: exit rate from state 0 is q1 under action 0 and q2 under
// action 1; the belief decays so that a threshold policy switches actions at
// a predictable crossing time.
PomdpModel two_phase_model(double q1, double q2) {
  PomdpModel m(2, 2, 1);
  m.rate(0, 0, 1) = q1;
  m.rate(0, 0, 0) = -q1;
  m.rate(1, 0, 1) = q2;
  m.rate(1, 0, 0) = -q2;
  for (int u = 0; u < 2; ++u)
    for (int x = 0; x < 2; ++x) m.likelihood(u, x, 0) = 1.0;
  return m;
}

class BeliefThresholdPolicy final : public Policy {
 public:
  explicit BeliefThresholdPolicy(double threshold) : threshold_(threshold) {}
  int action(const Belief& belief, double) override {
    return belief[0] > threshold_ ? 0 : 1;
  }

 private:
  double threshold_;
};

}  // namespace

TEST_CASE("waiting time truncates at the horizon when all rates vanish") {
  const auto m = envs::build_tiger();
  ConstantPolicy listen(0);
  Rng rng(1);
  const auto sample =
      sample_waiting_time(m, 0, Belief{0.5, 0.5}, listen, 0.0, 7.5, rng);
  CHECK(!sample.jumped);
  CHECK(sample.waiting_time == doctest::Approx(7.5));
  CHECK(sample.belief_end[0] == doctest::Approx(0.5));
}

TEST_CASE("homogeneous-rate waiting times pass a KS test against Exp(q)") {
  const double q = 2.0;
  const auto m = homogeneous_rate_model(q);
  ConstantPolicy policy(0);
  Rng rng(20260808);
  std::vector<double> samples;
  samples.reserve(10000);
  const double horizon = 40.0;  // truncation probability e^{-80}, negligible
  while (samples.size() < 10000) {
    const auto s =
        sample_waiting_time(m, 0, Belief{1.0, 0.0}, policy, 0.0, horizon, rng);
    REQUIRE(s.jumped);
    samples.push_back(s.waiting_time);
  }
  const double d = test_support::ks_statistic(
      samples, [q](double t) { return 1.0 - std::exp(-q * t); });
  const double p = test_support::ks_pvalue(samples.size(), d);
  CHECK(p > 0.01);
}

TEST_CASE("two-phase intensity waiting times match the integrated CDF") {
  // Exit rate switches from q1 to q2 when the belief crosses the threshold.
  // From pi0 = (1,0) under action 0 the first component decays as e^{-q1 t},
  // so the crossing time is -ln(theta)/q1; the simulator holds actions
  // constant over integrator cells, so the oracle uses the crossing snapped
  // to the next grid boundary.
  const double q1 = 1.0, q2 = 3.0, theta = 0.45;
  const double dt = 1e-3;
  const auto m = two_phase_model(q1, q2);
  BeliefThresholdPolicy policy(theta);
  const double t_cross_exact = -std::log(theta) / q1;
  const double t_cross = std::ceil(t_cross_exact / dt) * dt;

  // Independent oracle: numerically integrate the piecewise intensity.
  auto integrated_intensity = [&](double t) {
    const int steps = 20000;
    double acc = 0.0;
    const double h = t / steps;
    for (int i = 0; i < steps; ++i) {
      const double s = (i + 0.5) * h;
      acc += (s < t_cross ? q1 : q2) * h;
    }
    return acc;
  };
  auto cdf = [&](double t) { return 1.0 - std::exp(-integrated_intensity(t)); };

  Rng rng(424242);
  std::vector<double> samples;
  samples.reserve(4000);
  filter::IntegratorConfig config;
  config.dt = dt;
  while (samples.size() < 4000) {
    const auto s =
        sample_waiting_time(m, 0, Belief{1.0, 0.0}, policy, 0.0, 30.0, rng, config);
    REQUIRE(s.jumped);
    samples.push_back(s.waiting_time);
  }
  const double d = test_support::ks_statistic(samples, cdf);
  const double p = test_support::ks_pvalue(samples.size(), d);
  CHECK(p > 0.01);
}

TEST_CASE("sample_next_state of a two-state chain always moves to the sink") {
  const auto m = homogeneous_rate_model(1.5);
  Rng rng(7);
  for (int i = 0; i < 50; ++i) CHECK(sample_next_state(m, 0, 0, rng) == 1);
  CHECK_THROWS_AS(sample_next_state(m, 1, 0, rng), std::domain_error);
}

TEST_CASE("gridworld jump frequencies match the 0.7/0.1 split") {
  const auto m = envs::build_gridworld();
  envs::GridworldLayout layout;
  const int cell = layout.cell_index(2, 1);  // all four moves valid
  const int up = layout.cell_index(2, 2);
  Rng rng(8888);
  const int n = 100000;
  int count_up = 0;
  for (int i = 0; i < n; ++i)
    if (sample_next_state(m, cell, 0, rng) == up) ++count_up;
  const double freq = static_cast<double>(count_up) / n;
  const double sigma = std::sqrt(0.7 * 0.3 / n);
  CHECK(std::abs(freq - 0.7) <= 3.0 * sigma);
}

TEST_CASE("latent jump destinations pass a chi-squared test") {
  const auto m = test_support::random_model(4, 2, 2, 4040);
  const auto dist = m.jump_distribution(1, 0);
  Rng rng(31);
  const int n = 10000;
  std::vector<int> counts(4, 0);
  for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(
      sample_next_state(m, 1, 0, rng))];
  CHECK(counts[1] == 0);
  double chi2 = 0.0;
  for (int x = 0; x < 4; ++x) {
    if (x == 1) continue;
    const double expected = n * dist[static_cast<std::size_t>(x)];
    const double diff = counts[static_cast<std::size_t>(x)] - expected;
    chi2 += diff * diff / expected;
  }
  CHECK(chi2 < 13.82);  // chi2 quantile 0.999 at 2 degrees of freedom
}

TEST_CASE("sample_next_state is deterministic under a fixed seed") {
  const auto m = test_support::random_model(4, 2, 2, 4040);
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i)
    CHECK(sample_next_state(m, 0, 1, a) == sample_next_state(m, 0, 1, b));
}

TEST_CASE("observation times are empty when the rate is zero everywhere") {
  auto m = envs::build_tiger();
  m.obs_rate = {0.0, 0.0, 0.0};
  Rng rng(5);
  CHECK(sample_observation_times(m, [](double) { return 0; }, 10.0, rng).empty());
}

TEST_CASE("tiger listening produces about twenty observations in ten time units") {
  const auto m = envs::build_tiger();
  Rng rng(606);
  double total = 0.0;
  const int runs = 200;
  for (int r = 0; r < runs; ++r) {
    total += static_cast<double>(
        sample_observation_times(m, [](double) { return 0; }, 10.0, rng).size());
  }
  const double mean = total / runs;
  const double sigma = std::sqrt(20.0 / runs);  // Poisson variance over runs
  CHECK(std::abs(mean - 20.0) <= 3.0 * sigma);
}

TEST_CASE("observation inter-arrival times pass KS against Exp(lambda)") {
  const auto m = envs::build_tiger();
  Rng rng(707);
  std::vector<double> gaps;
  while (gaps.size() < 10000) {
    const auto times =
        sample_observation_times(m, [](double) { return 0; }, 50.0, rng);
    double prev = 0.0;
    for (double t : times) {
      gaps.push_back(t - prev);
      prev = t;
    }
  }
  gaps.resize(10000);
  const double d = test_support::ks_statistic(
      gaps, [](double t) { return 1.0 - std::exp(-2.0 * t); });
  CHECK(test_support::ks_pvalue(gaps.size(), d) > 0.01);
}

TEST_CASE("action-dependent observation rates are thinned correctly") {
  // Alternating schedule between listen (rate 2) and open (rate 0): all
  // observation times must fall into listen windows.
  const auto m = envs::build_tiger();
  auto schedule = [](double t) { return static_cast<int>(t) % 2 == 0 ? 0 : 1; };
  Rng rng(808);
  const auto times = sample_observation_times(m, schedule, 50.0, rng);
  CHECK(!times.empty());
  for (double t : times) CHECK(static_cast<int>(t) % 2 == 0);
}

TEST_CASE("aloha observations always report the channel memory") {
  const auto m = envs::build_slotted_aloha();
  Rng rng(909);
  for (int n = 0; n <= 9; ++n) {
    for (int c = 0; c < 3; ++c) {
      for (int i = 0; i < 5; ++i) CHECK(sample_observation(m, n * 3 + c, 3, rng) == c);
    }
  }
}

TEST_CASE("tiger hearing is correct with frequency 0.85") {
  const auto m = envs::build_tiger();
  Rng rng(1010);
  const int n = 100000;
  int correct = 0;
  for (int i = 0; i < n; ++i)
    if (sample_observation(m, 0, 0, rng) == 0) ++correct;
  const double freq = static_cast<double>(correct) / n;
  const double sigma = std::sqrt(0.85 * 0.15 / n);
  CHECK(std::abs(freq - 0.85) <= 3.0 * sigma);
}

TEST_CASE("tiger episodes keep the latent state constant") {
  const auto m = envs::build_tiger();
  ConstantPolicy listen(0);
  const auto ep = simulate_episode(m, listen, 5.0, uniform2, 11);
  REQUIRE(!ep.grid.empty());
  const int x0 = ep.grid.front().x;
  for (const auto& s : ep.grid) CHECK(s.x == x0);
  for (const auto& ev : ep.events) CHECK(ev.kind != EventKind::kJump);
}

TEST_CASE("episodes are identical under the same seed") {
  const auto m = test_support::random_model(3, 2, 2, 31415);
  class Greedy0 final : public Policy {
   public:
    int action(const Belief& b, double) override { return b[0] > 0.5 ? 0 : 1; }
  } policy;
  auto sampler = [](Rng& r) { return Belief(r.dirichlet(1.0, 3)); };
  const auto a = simulate_episode(m, policy, 6.0, sampler, 2024);
  const auto b = simulate_episode(m, policy, 6.0, sampler, 2024);
  CHECK(episode_to_json(a) == episode_to_json(b));
  const auto c = simulate_episode(m, policy, 6.0, sampler, 2025);
  CHECK(episode_to_json(a) != episode_to_json(c));
}

TEST_CASE("episode discounted return equals the trapezoidal re-integration") {
  const auto m = test_support::random_model(3, 2, 2, 161);
  ConstantPolicy policy(1);
  auto sampler = [](Rng& r) { return Belief(r.dirichlet(1.0, 3)); };
  const auto ep = simulate_episode(m, policy, 4.0, sampler, 5);
  const double recomputed = integrate_discounted_return(ep, m.discount);
  CHECK(std::abs(ep.discounted_return - recomputed) <= 1e-6);
}

TEST_CASE("episode events carry consistent Bayes resets and bounds") {
  const auto m = test_support::random_model(3, 2, 2, 171);
  ConstantPolicy policy(0);
  auto sampler = [](Rng& r) { return Belief(r.dirichlet(1.0, 3)); };
  const auto ep = simulate_episode(m, policy, 6.0, sampler, 6);
  bool saw_observation = false;
  for (const auto& ev : ep.events) {
    CHECK(ev.t > 0.0);
    CHECK(ev.t < ep.horizon);
    if (ev.kind != EventKind::kObservation) continue;
    saw_observation = true;
    const auto reset = filter::bayes_reset(m, ev.belief_before, ev.u, ev.y);
    for (int x = 0; x < m.num_states; ++x)
      CHECK(ev.belief_after[x] == doctest::Approx(reset[x]).epsilon(1e-12));
    // The inserted pre-event sample carries the pre-reset belief.
    const auto& pre = ep.grid[static_cast<std::size_t>(ev.grid_index)];
    CHECK(pre.t == ev.t);
    CHECK(pre.belief.p == ev.belief_before.p);
  }
  CHECK(saw_observation);
  for (const auto& s : ep.grid) CHECK(s.belief.on_simplex(1e-9));
}

TEST_CASE("episode CSV and JSON round-trip") {
  const auto m = test_support::random_model(3, 2, 2, 181);
  ConstantPolicy policy(0);
  auto sampler = [](Rng& r) { return Belief(r.dirichlet(1.0, 3)); };
  const auto ep = simulate_episode(m, policy, 2.0, sampler, 7);

  const auto csv = episode_to_csv(ep);
  const auto from_csv = episode_from_csv(csv);
  CHECK(episode_to_csv(from_csv) == csv);
  CHECK(from_csv.grid.size() == ep.grid.size());
  CHECK(from_csv.events.size() == ep.events.size());

  const auto json = episode_to_json(ep);
  const auto from_json = episode_from_json(json);
  CHECK(episode_to_json(from_json) == json);
}

TEST_CASE("ou process decays deterministically with zero noise") {
  OuProcess process;
  process.values = {2.0, -1.0};
  process.kappa = 7.5;
  process.sigma = 0.0;
  Rng rng(1);
  const double dt = 1e-3;
  const int steps = 1000;
  for (int i = 0; i < steps; ++i) process.step(dt, rng);
  const double factor = std::pow(1.0 - 7.5 * dt, steps);
  CHECK(process.values[0] == doctest::Approx(2.0 * factor).epsilon(1e-9));
  CHECK(process.values[1] == doctest::Approx(-1.0 * factor).epsilon(1e-9));
  // Euler decay approximates the exponential at this step size.
  CHECK(std::abs(factor - std::exp(-7.5 * dt * steps)) < 5e-3);
}

TEST_CASE("ou stationary variance matches sigma^2 / (2 kappa)") {
  const double kappa = 7.5, sigma = 1.5;
  Rng rng(55);
  auto process = OuProcess::stationary(1, kappa, sigma, rng);
  const double dt = 1e-3;
  const long steps = 1000000;
  double sum = 0.0, sum_sq = 0.0;
  for (long i = 0; i < steps; ++i) {
    process.step(dt, rng);
    sum += process.values[0];
    sum_sq += process.values[0] * process.values[0];
  }
  const double mean = sum / steps;
  const double variance = sum_sq / steps - mean * mean;
  const double expected = sigma * sigma / (2.0 * kappa);
  CHECK(std::abs(variance - expected) <= 0.1 * expected);
}

TEST_CASE("ou initial condition is drawn from the stationary law") {
  const double kappa = 7.5, sigma = 1.5;
  Rng rng(66);
  const int n = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto p = OuProcess::stationary(1, kappa, sigma, rng);
    sum += p.values[0];
    sum_sq += p.values[0] * p.values[0];
  }
  const double mean = sum / n;
  const double variance = sum_sq / n - mean * mean;
  const double expected = sigma * sigma / (2.0 * kappa);
  CHECK(std::abs(mean) <= 3.0 * std::sqrt(expected / n));
  CHECK(std::abs(variance - expected) <= 0.05 * expected);
}
