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

#ifndef CTPOMDP_MODEL_HPP_
#define CTPOMDP_MODEL_HPP_

#include <span>
#include <string>
#include <vector>

namespace ctpomdp {

/// Probability vector over the latent states (a point on the simplex).
/// Entries are expected to be nonnegative and to sum to one within 1e-9;
/// clip_and_normalize() restores that after numerical operations.
class Belief {
 public:
  Belief() = default;
  explicit Belief(int n) : p(static_cast<std::size_t>(n), 0.0) {}
  Belief(std::initializer_list<double> init) : p(init) {}
  explicit Belief(std::vector<double> probs) : p(std::move(probs)) {}

  static Belief uniform(int n);
  static Belief point_mass(int n, int x);

  int size() const { return static_cast<int>(p.size()); }
  double operator[](int i) const { return p[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return p[static_cast<std::size_t>(i)]; }

  /// Clips negative round-off entries to zero and rescales to sum one.
  /// Throws if the clipped mass is not positive.
  void clip_and_normalize();

  bool on_simplex(double tol = 1e-9) const;

  std::vector<double> p;
};

struct Labels {
  std::vector<std::string> states;
  std::vector<std::string> actions;
  std::vector<std::string> observations;
};

/// Controlled latent continuous-time Markov chain with point-process
/// observations: generator rates per action, observation likelihoods,
/// per-action observation rates, reward rates and a discount time constant.
///
/// The model is immutable after construction and safe to share read-only
/// across concurrent workers.
class PomdpModel {
 public:
  PomdpModel() = default;
  PomdpModel(int num_states, int num_actions, int num_observations);

  int num_states = 0;
  int num_actions = 0;
  int num_observations = 0;

  /// Generator entries rate(u, x, x') in 1/time; diagonal stored explicitly
  /// as minus the exit rate.
  std::vector<double> rates;
  /// Observation likelihoods p(y | x, u), rows normalized over y.
  std::vector<double> obs_likelihood;
  /// Observation Poisson intensity per action, 1/time.
  std::vector<double> obs_rate;
  /// Reward rate r(u, x), reward/time.
  std::vector<double> reward_rate;
  /// Discount time constant tau (> 0).
  double discount = 0.9;

  Labels labels;

  double rate(int u, int x, int to) const {
    return rates[idx3(u, x, to, num_states, num_states)];
  }
  double& rate(int u, int x, int to) {
    return rates[idx3(u, x, to, num_states, num_states)];
  }
  double likelihood(int u, int x, int y) const {
    return obs_likelihood[idx3(u, x, y, num_states, num_observations)];
  }
  double& likelihood(int u, int x, int y) {
    return obs_likelihood[idx3(u, x, y, num_states, num_observations)];
  }
  double reward(int u, int x) const {
    return reward_rate[static_cast<std::size_t>(u) *
                           static_cast<std::size_t>(num_states) +
                       static_cast<std::size_t>(x)];
  }
  double& reward(int u, int x) {
    return reward_rate[static_cast<std::size_t>(u) *
                           static_cast<std::size_t>(num_states) +
                       static_cast<std::size_t>(x)];
  }

  /// Generator row for (u, x) as a span over the destination states.
  std::span<const double> rate_row(int u, int x) const;
  std::span<const double> likelihood_row(int u, int x) const;

  /// Total rate of leaving state x under action u (sum of the off-diagonal
  /// generator row).
  double exit_rate(int x, int u) const;

  /// Largest exit rate of x over all actions; the thinning bound q_max.
  double max_exit_rate(int x) const;

  /// Largest observation rate over all actions.
  double max_obs_rate() const;

  /// Distribution of the next state given that a jump occurs in (x, u).
  /// Zero on the diagonal. Throws if exit_rate(x, u) == 0.
  std::vector<double> jump_distribution(int x, int u) const;

  /// Expected reward rate of action u under the belief.
  double expected_reward(const Belief& belief, int u) const;

  /// True when p(y | x, u) does not depend on u; lets callers share Bayes
  /// posteriors across actions.
  bool obs_likelihood_action_independent() const;

  /// Returns one message per violated invariant (empty means valid).
  /// Violations are data, not failures.
  std::vector<std::string> validate() const;

  /// Throws std::invalid_argument listing all violations, if any.
  void require_valid() const;

  void check_state(int x) const;
  void check_action(int u) const;
  void check_observation(int y) const;

 private:
  static std::size_t idx3(int a, int b, int c, int dim_b, int dim_c) {
    return (static_cast<std::size_t>(a) * static_cast<std::size_t>(dim_b) +
            static_cast<std::size_t>(b)) *
               static_cast<std::size_t>(dim_c) +
           static_cast<std::size_t>(c);
  }
};

/// Deterministic mapping from the belief state (and wall-clock episode time,
/// for time-variant exploration) to an action index.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual int action(const Belief& belief, double t) = 0;
};

class ConstantPolicy final : public Policy {
 public:
  explicit ConstantPolicy(int action) : action_(action) {}
  int action(const Belief&, double) override { return action_; }

 private:
  int action_;
};

/// JSON serialization of the model schema. Keys: num_states, rates,
/// obs_likelihood, obs_rate, reward_rate, discount, labels (action and
/// observation counts are inferred from the array shapes).
std::string model_to_json(const PomdpModel& model);
PomdpModel model_from_json(const std::string& text);

}  // namespace ctpomdp

#endif  // CTPOMDP_MODEL_HPP_
