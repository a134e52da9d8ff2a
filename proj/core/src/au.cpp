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

#include "ctpomdp/au.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "value_context.hpp"

namespace ctpomdp::au {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0)
    throw std::invalid_argument("ReplayBuffer: capacity must be positive");
  ring_.reserve(capacity);
}

void ReplayBuffer::push(TransitionSample sample) {
  if (count_ < capacity_) {
    ring_.push_back(std::move(sample));
    ++count_;
  } else {
    // Overwrite the oldest entry.
    ring_[head_] = std::move(sample);
    head_ = (head_ + 1) % capacity_;
  }
}

const TransitionSample& ReplayBuffer::at(std::size_t index) const {
  if (index >= count_) throw std::out_of_range("ReplayBuffer::at");
  return ring_[(head_ + index) % capacity_];
}

std::vector<const TransitionSample*> ReplayBuffer::sample_batch(int batch_size,
                                                                Rng& rng) const {
  const std::size_t n = count_;
  const std::size_t take =
      std::min(static_cast<std::size_t>(std::max(batch_size, 0)), n);
  std::vector<const TransitionSample*> batch;
  batch.reserve(take);
  std::unordered_set<std::size_t> chosen;
  chosen.reserve(take * 2);
  while (batch.size() < take) {
    const auto idx = static_cast<std::size_t>(
        rng.uniform_int(static_cast<int>(n)));
    if (chosen.insert(idx).second) batch.push_back(&at(idx));
  }
  return batch;
}

double ReparameterizedMlpAdvantage::advantage(const Belief& belief, int u) const {
  const auto raw = net_->forward(belief.p);
  double best = raw[0];
  for (double v : raw) best = std::max(best, v);
  return raw[static_cast<std::size_t>(u)] - best;
}

namespace {

double td_delta(const PomdpModel& model, const hjb::ValueFunction& value,
                const TransitionSample& sample, const TdOptions& options) {
  const int u = sample.u;
  model.check_action(u);
  const double tau = model.discount;
  const double lambda = model.obs_rate[static_cast<std::size_t>(u)];
  const double v = value.value(sample.belief);
  const auto g = value.gradient(sample.belief);
  const auto f = filter::drift(model, sample.belief, u);
  double drift_term = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) drift_term += g[i] * f[i];

  double jump_term = 0.0;
  if (options.sampled_jump_term) {
    if (sample.has_observation)
      jump_term = value.value(sample.belief_post) - v;
  } else {
    const auto ensemble = filter::posterior_ensemble(model, sample.belief, u);
    double expectation = 0.0;
    for (const auto& entry : ensemble.entries) {
      if (entry.weight > 0.0 && entry.defined)
        expectation += entry.weight * value.value(entry.posterior);
    }
    jump_term = expectation - v;
  }
  return sample.reward - v + tau * drift_term + tau * lambda * jump_term;
}

}  // namespace

double td_residual(const PomdpModel& model, const hjb::ValueFunction& value,
                   const AdvantageFunction& advantage,
                   const TransitionSample& sample, const TdOptions& options) {
  return advantage.advantage(sample.belief, sample.u) -
         td_delta(model, value, sample, options);
}

double td_residual(const PomdpModel& model, const nn::Mlp& value_net,
                   const nn::Mlp& advantage_net, const TransitionSample& sample,
                   const TdOptions& options) {
  hjb::MlpValueFunction vf(value_net);
  ReparameterizedMlpAdvantage af(advantage_net);
  return td_residual(model, vf, af, sample, options);
}

double batch_mean_squared_residual(const PomdpModel& model,
                                   const nn::Mlp& value_net,
                                   const nn::Mlp& advantage_net,
                                   std::span<const TransitionSample* const> batch,
                                   const TdOptions& options,
                                   nn::Grads* value_grads,
                                   nn::Grads* advantage_grads) {
  if (batch.empty())
    throw std::invalid_argument("batch_mean_squared_residual: empty batch");
  detail::ValueContext ctx(model, value_net);
  if (value_grads) value_grads->set_zero();
  if (advantage_grads) advantage_grads->set_zero();
  const double tau = model.discount;
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  const int num_actions = model.num_actions;
  std::vector<double> cotangent(static_cast<std::size_t>(num_actions));
  double loss = 0.0;

  for (const auto* sample : batch) {
    const int u = sample->u;
    model.check_action(u);
    const double lambda = model.obs_rate[static_cast<std::size_t>(u)];
    ctx.set_belief(sample->belief);

    double jump_term = 0.0;
    nn::Mlp::Cache post_cache;
    bool sampled_post = false;
    if (options.sampled_jump_term) {
      if (sample->has_observation) {
        jump_term =
            value_net.forward_scalar(sample->belief_post.p, &post_cache) -
            ctx.value();
        sampled_post = true;
      }
    } else {
      jump_term = ctx.jump_gap(u);
    }
    const double delta = sample->reward - ctx.value() + tau * ctx.drift_dot(u) +
                         tau * lambda * jump_term;

    nn::Mlp::Cache adv_cache;
    const auto raw = advantage_net.forward(sample->belief.p, &adv_cache);
    int arg_max = 0;
    for (int a = 1; a < num_actions; ++a)
      if (raw[static_cast<std::size_t>(a)] > raw[static_cast<std::size_t>(arg_max)])
        arg_max = a;
    const double advantage =
        raw[static_cast<std::size_t>(u)] - raw[static_cast<std::size_t>(arg_max)];
    const double residual = advantage - delta;
    loss += residual * residual;
    const double cot = 2.0 * residual * inv_batch;

    if (advantage_grads) {
      std::fill(cotangent.begin(), cotangent.end(), 0.0);
      cotangent[static_cast<std::size_t>(u)] += cot;
      cotangent[static_cast<std::size_t>(arg_max)] -= cot;
      advantage_net.add_param_grads(adv_cache, cotangent, 1.0, *advantage_grads);
    }
    if (value_grads) {
      // d residual / d phi = -d delta / d phi.
      if (options.sampled_jump_term) {
        if (sampled_post) {
          ctx.add_value_param_grads(cot * (1.0 + tau * lambda), *value_grads);
          const double c = -cot * tau * lambda;
          value_net.add_param_grads(post_cache, std::span<const double>(&c, 1),
                                    1.0, *value_grads);
        } else {
          ctx.add_value_param_grads(cot, *value_grads);
        }
        ctx.add_drift_param_grads(u, -cot * tau, *value_grads);
      } else {
        ctx.add_value_param_grads(cot * (1.0 + tau * lambda), *value_grads);
        ctx.add_drift_param_grads(u, -cot * tau, *value_grads);
        ctx.add_jump_param_grads(u, -cot * tau * lambda, *value_grads);
      }
    }
  }
  return loss * inv_batch;
}

int perturbed_greedy_action(const nn::Mlp& advantage_net,
                            std::span<const double> perturbation,
                            const Belief& belief) {
  const auto raw = advantage_net.forward(belief.p);
  if (perturbation.size() != raw.size())
    throw std::invalid_argument(
        "perturbed_greedy_action: perturbation size mismatch");
  int arg_max = 0;
  double best = raw[0] + perturbation[0];
  for (std::size_t u = 1; u < raw.size(); ++u) {
    const double v = raw[u] + perturbation[u];
    if (v > best) {
      best = v;
      arg_max = static_cast<int>(u);
    }
  }
  return arg_max;
}

ExplorationPolicy::ExplorationPolicy(const nn::Mlp& advantage_net,
                                     sim::OuProcess process, double dt,
                                     std::uint64_t noise_seed)
    : net_(&advantage_net),
      process_(std::move(process)),
      dt_(dt),
      noise_rng_(noise_seed) {
  if (!(dt > 0.0))
    throw std::invalid_argument("ExplorationPolicy: dt must be > 0");
}

int ExplorationPolicy::action(const Belief& belief, double t) {
  // One OU step per completed grid cell; queries between boundaries (e.g. at
  // observation resets) hold the current perturbation.
  const long target = static_cast<long>(std::floor(t / dt_ + 1e-9));
  while (steps_done_ < target) {
    process_.step(dt_, noise_rng_);
    ++steps_done_;
  }
  return perturbed_greedy_action(*net_, process_.values, belief);
}

std::vector<TransitionSample> subsample_episode(const sim::Episode& episode,
                                                int count, Rng& rng,
                                                long episode_id) {
  const auto grid_size = episode.grid.size();
  if (grid_size == 0)
    throw std::invalid_argument("subsample_episode: episode has no grid");
  std::size_t take = static_cast<std::size_t>(std::max(count, 0));
  if (take > grid_size) {
    std::fprintf(stderr,
                 "subsample_episode: requested %d samples from a grid of %zu, "
                 "clamping\n",
                 count, grid_size);
    take = grid_size;
  }

  std::unordered_set<std::size_t> chosen;
  chosen.reserve(take * 2);
  std::vector<std::size_t> indices;
  indices.reserve(take);
  while (indices.size() < take) {
    const auto idx = static_cast<std::size_t>(
        rng.uniform_int(static_cast<int>(grid_size)));
    if (chosen.insert(idx).second) indices.push_back(idx);
  }
  std::sort(indices.begin(), indices.end());

  std::vector<TransitionSample> samples;
  samples.reserve(take + episode.events.size());
  for (const auto idx : indices) {
    const auto& g = episode.grid[idx];
    TransitionSample s;
    s.t = g.t;
    s.belief = g.belief;
    s.u = g.u;
    s.reward = g.reward;
    s.episode_id = episode_id;
    s.seed = episode.seed;
    samples.push_back(std::move(s));
  }
  for (const auto& ev : episode.events) {
    if (ev.kind != sim::EventKind::kObservation) continue;
    const auto& pre = episode.grid[static_cast<std::size_t>(ev.grid_index)];
    TransitionSample s;
    s.t = ev.t;
    s.belief = ev.belief_before;
    s.u = pre.u;
    s.reward = pre.reward;
    s.has_observation = true;
    s.belief_post = ev.belief_after;
    s.episode_id = episode_id;
    s.seed = episode.seed;
    samples.push_back(std::move(s));
  }
  return samples;
}

AuConfig default_au_config(const std::string& env_name) {
  AuConfig config;
  if (env_name == "tiger") {
    config.episode_length = 10.0;
    config.subsample_count = 1000;
  } else if (env_name == "aloha") {
    config.episode_length = 20.0;
    config.subsample_count = 1000;
  } else if (env_name == "gridworld") {
    config.episode_length = 5.0;
    config.subsample_count = 100;
  } else {
    throw std::invalid_argument("default_au_config: unknown environment '" +
                                env_name + "'");
  }
  return config;
}

AuTrainResult train_advantage_updating(const PomdpModel& model,
                                       const AuConfig& config,
                                       std::uint64_t seed) {
  model.require_valid();
  if (config.episodes <= 0 || config.steps_per_episode <= 0 ||
      config.batch_size <= 0 || !(config.episode_length > 0.0))
    throw std::invalid_argument("train_advantage_updating: bad config");

  // Independent deterministic streams for network init, episodes, OU noise,
  // subsampling and batch draws.
  Rng init_rng(derive_seed(seed, 0));
  Rng train_rng(derive_seed(seed, 1));

  nn::Mlp value_net = nn::Mlp::value_net(model.num_states);
  value_net.init_params(init_rng);
  nn::Mlp advantage_net =
      nn::Mlp::advantage_net(model.num_states, model.num_actions);
  advantage_net.init_params(init_rng);
  nn::Adam value_adam(value_net, config.adam);
  nn::Adam advantage_adam(advantage_net, config.adam);

  sim::InitialBeliefSampler initial = config.initial_belief;
  if (!initial) {
    const int n = model.num_states;
    const double alpha = config.dirichlet_alpha;
    initial = [n, alpha](Rng& rng) {
      return hjb::sample_collocation_belief(n, alpha, rng);
    };
  }

  ReplayBuffer buffer(config.replay_capacity);
  nn::Grads value_grads = value_net.make_grads();
  nn::Grads advantage_grads = advantage_net.make_grads();

  AuTrainResult result;
  result.loss_trace.reserve(static_cast<std::size_t>(config.episodes));
  result.return_trace.reserve(static_cast<std::size_t>(config.episodes));
  result.sigma_trace.reserve(static_cast<std::size_t>(config.episodes));

  for (long episode = 0; episode < config.episodes; ++episode) {
    const double frac =
        config.episodes > 1
            ? static_cast<double>(episode) / static_cast<double>(config.episodes - 1)
            : 1.0;
    const double sigma =
        config.ou_sigma_start + (config.ou_sigma_end - config.ou_sigma_start) * frac;

    const std::uint64_t noise_seed =
        derive_seed(seed, 1000 + 3 * static_cast<std::uint64_t>(episode));
    const std::uint64_t episode_seed =
        derive_seed(seed, 1001 + 3 * static_cast<std::uint64_t>(episode));
    const std::uint64_t subsample_seed =
        derive_seed(seed, 1002 + 3 * static_cast<std::uint64_t>(episode));

    Rng stationary_rng(noise_seed);
    auto process = sim::OuProcess::stationary(model.num_actions, config.ou_kappa,
                                              sigma, stationary_rng);
    ExplorationPolicy policy(advantage_net, std::move(process),
                             config.integrator.dt,
                             derive_seed(noise_seed, 1));
    const auto ep = sim::simulate_episode(model, policy, config.episode_length,
                                          initial, episode_seed,
                                          config.integrator);
    Rng subsample_rng(subsample_seed);
    auto samples =
        subsample_episode(ep, config.subsample_count, subsample_rng, episode);
    if (config.expected_reward_signal) {
      for (auto& s : samples) s.reward = model.expected_reward(s.belief, s.u);
    }
    for (auto& s : samples) buffer.push(std::move(s));

    double episode_loss = 0.0;
    for (int step = 0; step < config.steps_per_episode; ++step) {
      const auto batch = buffer.sample_batch(config.batch_size, train_rng);
      const double loss =
          batch_mean_squared_residual(model, value_net, advantage_net, batch,
                                      config.td, &value_grads, &advantage_grads);
      if (!std::isfinite(loss)) {
        std::ostringstream os;
        os << "train_advantage_updating: loss diverged at episode " << episode
           << " step " << step;
        throw std::runtime_error(os.str());
      }
      value_adam.step(value_net, value_grads);
      advantage_adam.step(advantage_net, advantage_grads);
      episode_loss += loss;
    }
    result.loss_trace.push_back(episode_loss /
                                static_cast<double>(config.steps_per_episode));
    result.return_trace.push_back(ep.discounted_return);
    result.sigma_trace.push_back(sigma);
  }
  result.value_net = std::move(value_net);
  result.advantage_net = std::move(advantage_net);
  return result;
}

}  // namespace ctpomdp::au
