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

#ifndef CTPOMDP_SIM_HPP_
#define CTPOMDP_SIM_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ctpomdp/filter.hpp"
#include "ctpomdp/model.hpp"
#include "ctpomdp/rng.hpp"

namespace ctpomdp::sim {

enum class EventKind { kJump, kObservation, kActionChange };

struct EventRecord {
  double t = 0.0;
  EventKind kind = EventKind::kJump;
  int x_from = -1;
  int x_to = -1;
  int u = -1;
  int y = -1;
  Belief belief_before;
  Belief belief_after;
  /// Index of the grid sample after which this event occurred; events at a
  /// sample's exact time follow their inserted pre-event sample.
  int grid_index = -1;
};

struct GridSample {
  double t = 0.0;
  int x = -1;
  int u = -1;
  double reward = 0.0;
  Belief belief;
};

/// One simulated trajectory: dense samples on the integrator grid (plus
/// exact-time samples inserted around events), the chronological event list,
/// and the discounted return integrated from the dense reward signal.
struct Episode {
  std::vector<GridSample> grid;
  std::vector<EventRecord> events;
  double horizon = 0.0;
  double discounted_return = 0.0;
  std::uint64_t seed = 0;
};

/// Ornstein-Uhlenbeck exploration noise, one component per action:
/// d eps = -kappa * eps dt + sigma dW, stepped by Euler-Maruyama.
struct OuProcess {
  std::vector<double> values;
  double kappa = 7.5;
  double sigma = 1.0;

  /// Initial perturbation drawn from the stationary law N(0, sigma^2/(2 kappa)).
  static OuProcess stationary(int num_actions, double kappa, double sigma,
                              Rng& rng);

  void step(double dt, Rng& rng);
};

struct WaitingTimeSample {
  /// False when no jump occurred before the horizon (zero rate or truncation).
  bool jumped = false;
  /// Waiting time xi from the start time; horizon - t when truncated.
  double waiting_time = 0.0;
  /// Filtering distribution at the end time, integrated alongside.
  Belief belief_end;
  /// Action held at the end time.
  int action_end = -1;
};

/// Thinning sample of the next latent jump time of state x starting at time
/// t, under the policy-modulated exit rate. The belief is propagated jointly
/// on the integrator grid (prior dynamics only, no observations); when
/// `trajectory` is given it receives the (time, belief) pairs at every grid
/// point up to the end time.
WaitingTimeSample sample_waiting_time(
    const PomdpModel& model, int x, const Belief& belief, Policy& policy,
    double t, double horizon, Rng& rng,
    const filter::IntegratorConfig& config = {},
    std::vector<std::pair<double, Belief>>* trajectory = nullptr);

/// Next state after a jump out of (x, u), per the jump distribution.
/// Throws std::domain_error when the exit rate is zero.
int sample_next_state(const PomdpModel& model, int x, int u, Rng& rng);

/// Event times of the observation Poisson process with action-dependent
/// intensity, thinned against the largest observation rate.
std::vector<double> sample_observation_times(const PomdpModel& model,
                                             const filter::ActionSource& action_of_t,
                                             double horizon, Rng& rng);

/// Observation drawn from p(. | x, u).
int sample_observation(const PomdpModel& model, int x, int u, Rng& rng);

using InitialBeliefSampler = std::function<Belief(Rng&)>;

/// Simulates one episode: latent jumps by thinning, observations by a thinned
/// Poisson process with Bayes resets, the belief integrated on the dt grid
/// and the policy re-evaluated at every grid point and reset. The initial
/// latent state is drawn from the initial belief. The episode is a pure
/// function of (model, policy, seed, config).
Episode simulate_episode(const PomdpModel& model, Policy& policy,
                         double horizon,
                         const InitialBeliefSampler& initial_belief,
                         std::uint64_t seed,
                         const filter::IntegratorConfig& config = {});

/// Discounted return recomputed from the dense reward samples by the
/// trapezoidal rule (the value stored in the episode is exactly this).
double integrate_discounted_return(const Episode& episode, double discount);

/// Line-oriented trace: one row per grid sample and per event,
/// `t,event_type,x,u,y,reward,belief_0..belief_{n-1}`, with a #meta header.
std::string episode_to_csv(const Episode& episode);
Episode episode_from_csv(const std::string& text);

std::string episode_to_json(const Episode& episode);
Episode episode_from_json(const std::string& text);

}  // namespace ctpomdp::sim

#endif  // CTPOMDP_SIM_HPP_
