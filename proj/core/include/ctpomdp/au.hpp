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

#ifndef CTPOMDP_AU_HPP_
#define CTPOMDP_AU_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ctpomdp/hjb.hpp"
#include "ctpomdp/model.hpp"
#include "ctpomdp/nn.hpp"
#include "ctpomdp/rng.hpp"
#include "ctpomdp/sim.hpp"

namespace ctpomdp::au {

/// One subsampled point of an episode: the belief, held action and reward
/// rate at time t; observation-flagged samples additionally carry the
/// post-reset belief.
struct TransitionSample {
  double t = 0.0;
  Belief belief;
  int u = -1;
  double reward = 0.0;
  bool has_observation = false;
  Belief belief_post;  // only meaningful when has_observation
  long episode_id = -1;
  std::uint64_t seed = 0;
};

/// Bounded FIFO store with uniform batch sampling (without replacement
/// within a batch).
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(TransitionSample sample);
  std::size_t size() const { return count_; }
  std::size_t capacity() const { return capacity_; }

  /// k-th stored sample in FIFO order, 0 = oldest.
  const TransitionSample& at(std::size_t index) const;

  /// Uniform sample of min(batch_size, size()) distinct stored samples.
  std::vector<const TransitionSample*> sample_batch(int batch_size, Rng& rng) const;

 private:
  std::vector<TransitionSample> ring_;
  std::size_t capacity_ = 0;
  std::size_t head_ = 0;  // index of the oldest sample
  std::size_t count_ = 0;
};

/// Advantage value A(pi, u) used inside the TD residual. The trainer uses
/// the reparameterized MLP realization; tests plug analytic stubs.
class AdvantageFunction {
 public:
  virtual ~AdvantageFunction() = default;
  virtual double advantage(const Belief& belief, int u) const = 0;
};

class ReparameterizedMlpAdvantage final : public AdvantageFunction {
 public:
  explicit ReparameterizedMlpAdvantage(const nn::Mlp& net) : net_(&net) {}
  double advantage(const Belief& belief, int u) const override;

 private:
  const nn::Mlp* net_;
};

struct TdOptions {
  /// False (default): jump term as the exact expectation over the finite
  /// observation space. True: the sampled form, which contributes
  /// tau * lambda * (V(pi(t+)) - V(pi(t))) at observation-flagged samples
  /// and zero elsewhere.
  bool sampled_jump_term = false;
};

/// Continuous-time TD residual E(t) = A(pi, u) - delta(t) with
/// delta = r - V(pi) + tau * dV/dpi . f(pi, u) + tau * lambda(u) * (jump term);
/// the diffusion contribution is zero for the continuous-discrete filter.
double td_residual(const PomdpModel& model, const hjb::ValueFunction& value,
                   const AdvantageFunction& advantage,
                   const TransitionSample& sample, const TdOptions& options = {});

double td_residual(const PomdpModel& model, const nn::Mlp& value_net,
                   const nn::Mlp& advantage_net, const TransitionSample& sample,
                   const TdOptions& options = {});

/// Mean of the squared TD residuals over a batch (no reweighting of any
/// kind); this is the objective the trainer steps on. When the gradient
/// accumulators are given, they receive d loss / d params of the respective
/// networks (zeroed first).
double batch_mean_squared_residual(const PomdpModel& model,
                                   const nn::Mlp& value_net,
                                   const nn::Mlp& advantage_net,
                                   std::span<const TransitionSample* const> batch,
                                   const TdOptions& options = {},
                                   nn::Grads* value_grads = nullptr,
                                   nn::Grads* advantage_grads = nullptr);

/// argmax_u { Abar(pi, u) + perturbation[u] }, ties to the lowest index.
int perturbed_greedy_action(const nn::Mlp& advantage_net,
                            std::span<const double> perturbation,
                            const Belief& belief);

/// Exploration policy: greedy over the advantage net perturbed by an
/// Ornstein-Uhlenbeck process advanced on the simulation grid (one step per
/// completed dt cell; mid-cell queries reuse the held perturbation).
class ExplorationPolicy final : public Policy {
 public:
  ExplorationPolicy(const nn::Mlp& advantage_net, sim::OuProcess process,
                    double dt, std::uint64_t noise_seed);
  int action(const Belief& belief, double t) override;
  const sim::OuProcess& process() const { return process_; }

 private:
  const nn::Mlp* net_;
  sim::OuProcess process_;
  double dt_;
  Rng noise_rng_;
  long steps_done_ = 0;
};

/// N_s grid samples drawn uniformly without replacement (clamped with a
/// warning if the grid is smaller) plus one flagged sample per observation
/// event carrying the post-reset belief.
std::vector<TransitionSample> subsample_episode(const sim::Episode& episode,
                                                int count, Rng& rng,
                                                long episode_id = -1);

struct AuConfig {
  long episodes = 1000;
  int steps_per_episode = 20;
  int batch_size = 256;
  double episode_length = 10.0;  // l_e
  int subsample_count = 1000;    // N_s
  double ou_kappa = 7.5;
  double ou_sigma_start = 1.5;
  double ou_sigma_end = 0.5;
  std::size_t replay_capacity = 200000;
  double dirichlet_alpha = 0.1;  // initial-belief law for |X| > 2
  nn::AdamConfig adam;
  filter::IntegratorConfig integrator;
  TdOptions td;
  /// False (default): the reward signal fed to the residual is the observed
  /// latent-state reward rate r(t) = R(X(t), u). True: replace it with the
  /// belief expectation E[R | pi(t), u].
  bool expected_reward_signal = false;
  /// Initial-belief sampler; when empty, uniform over the first coordinate
  /// for two-state models and symmetric Dirichlet otherwise.
  sim::InitialBeliefSampler initial_belief;
};

/// Task defaults (episode length and subsample count) for the bundled
/// environments "tiger", "aloha" and "gridworld".
AuConfig default_au_config(const std::string& env_name);

struct AuTrainResult {
  nn::Mlp value_net;
  nn::Mlp advantage_net;
  std::vector<double> loss_trace;    // mean batch loss per episode
  std::vector<double> return_trace;  // discounted return per episode
  std::vector<double> sigma_trace;   // exploration sigma per episode
};

/// Online advantage updating: per episode, simulate under the OU-perturbed
/// greedy policy (sigma decaying linearly across episodes), subsample into
/// the replay buffer, then run the configured number of batch steps
/// minimizing the mean squared TD residual, updating both networks jointly
/// (one Adam step each per batch). Deterministic in (model, config, seed).
AuTrainResult train_advantage_updating(const PomdpModel& model,
                                       const AuConfig& config,
                                       std::uint64_t seed);

}  // namespace ctpomdp::au

#endif  // CTPOMDP_AU_HPP_
