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

#include "ctpomdp/hjb.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "value_context.hpp"

namespace ctpomdp::hjb {

double MlpValueFunction::value(const Belief& belief) const {
  return net_->forward_scalar(belief.p);
}

std::vector<double> MlpValueFunction::gradient(const Belief& belief) const {
  nn::Mlp::Cache cache;
  net_->forward_scalar(belief.p, &cache);
  return net_->input_gradient(cache);
}

ResidualTerms advantage_residual_terms(const PomdpModel& model,
                                       const ValueFunction& value,
                                       const Belief& belief, int u,
                                       const ResidualOptions& options) {
  model.check_action(u);
  if (belief.size() != model.num_states)
    throw std::invalid_argument("advantage_residual: belief dimension mismatch");
  const double tau = options.tau > 0.0 ? options.tau : model.discount;
  const double v = value.value(belief);
  const auto g = value.gradient(belief);
  const auto f = filter::drift(model, belief, u);
  double drift_dot = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) drift_dot += g[i] * f[i];

  double jump_expectation = 0.0;
  const auto ensemble = filter::posterior_ensemble(model, belief, u);
  for (const auto& entry : ensemble.entries) {
    if (entry.weight > 0.0 && entry.defined)
      jump_expectation += entry.weight * value.value(entry.posterior);
  }
  ResidualTerms terms;
  terms.expected_reward = model.expected_reward(belief, u);
  terms.value = (options.printed_sign_variant ? 1.0 : -1.0) * v;
  terms.drift = tau * drift_dot;
  terms.diffusion = 0.0;  // zero dispersion between resets
  terms.jump = tau * model.obs_rate[static_cast<std::size_t>(u)] *
               (jump_expectation - v);
  return terms;
}

double advantage_residual(const PomdpModel& model, const ValueFunction& value,
                          const Belief& belief, int u,
                          const ResidualOptions& options) {
  return advantage_residual_terms(model, value, belief, u, options).total();
}

double advantage_residual(const PomdpModel& model, const nn::Mlp& value_net,
                          const Belief& belief, int u,
                          const ResidualOptions& options) {
  MlpValueFunction vf(value_net);
  return advantage_residual(model, vf, belief, u, options);
}

double discount_schedule(long step, double target_tau, long horizon,
                         double tau_min) {
  if (step < 0) throw std::invalid_argument("discount_schedule: step < 0");
  if (!(target_tau > 0.0))
    throw std::invalid_argument("discount_schedule: target tau must be > 0");
  if (tau_min < 0.0) tau_min = 0.1 * target_tau;
  if (horizon <= 0 || step >= horizon) return target_tau;
  return tau_min + (target_tau - tau_min) * static_cast<double>(step) /
                       static_cast<double>(horizon);
}

Belief sample_collocation_belief(int num_states, double alpha, Rng& rng) {
  if (num_states == 2) {
    const double a = rng.uniform();
    return Belief{a, 1.0 - a};
  }
  return Belief(rng.dirichlet(alpha, num_states));
}

namespace {

// Residual of action u at the context's belief, with the value-sign flip for
// the printed variant.
double context_residual(const PomdpModel& model, detail::ValueContext& ctx,
                        int u, double tau, double value_sign) {
  const double lambda = model.obs_rate[static_cast<std::size_t>(u)];
  return model.expected_reward(ctx.belief(), u) + value_sign * ctx.value() +
         tau * ctx.drift_dot(u) + tau * lambda * ctx.jump_gap(u);
}

}  // namespace

double value_residual_batch(const PomdpModel& model, const nn::Mlp& value_net,
                            std::span<const Belief> beliefs,
                            std::span<const int> actions, double tau,
                            bool printed_sign_variant, nn::Grads* grads) {
  if (beliefs.size() != actions.size() || beliefs.empty())
    throw std::invalid_argument("value_residual_batch: bad batch shapes");
  detail::ValueContext ctx(model, value_net);
  if (grads) grads->set_zero();
  const double value_sign = printed_sign_variant ? 1.0 : -1.0;
  const double inv_batch = 1.0 / static_cast<double>(beliefs.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < beliefs.size(); ++i) {
    const int u = actions[i];
    model.check_action(u);
    ctx.set_belief(beliefs[i]);
    const double residual = context_residual(model, ctx, u, tau, value_sign);
    loss += residual * residual;
    if (!grads) continue;
    const double cot = 2.0 * residual * inv_batch;
    const double lambda = model.obs_rate[static_cast<std::size_t>(u)];
    ctx.add_value_param_grads(cot * (value_sign - tau * lambda), *grads);
    ctx.add_drift_param_grads(u, cot * tau, *grads);
    ctx.add_jump_param_grads(u, cot * tau * lambda, *grads);
  }
  return loss * inv_batch;
}

double advantage_fit_batch(const nn::Mlp& advantage_net,
                           std::span<const Belief> beliefs,
                           std::span<const std::vector<double>> targets,
                           nn::Grads* grads) {
  if (beliefs.size() != targets.size() || beliefs.empty())
    throw std::invalid_argument("advantage_fit_batch: bad batch shapes");
  if (grads) grads->set_zero();
  const int num_actions = advantage_net.out_dim();
  const double inv_batch = 1.0 / static_cast<double>(beliefs.size());
  std::vector<double> cotangent(static_cast<std::size_t>(num_actions));
  double loss = 0.0;
  for (std::size_t i = 0; i < beliefs.size(); ++i) {
    if (static_cast<int>(targets[i].size()) != num_actions)
      throw std::invalid_argument("advantage_fit_batch: target size mismatch");
    nn::Mlp::Cache cache;
    const auto raw = advantage_net.forward(beliefs[i].p, &cache);
    int arg_max = 0;
    for (int u = 1; u < num_actions; ++u)
      if (raw[static_cast<std::size_t>(u)] > raw[static_cast<std::size_t>(arg_max)])
        arg_max = u;
    std::fill(cotangent.begin(), cotangent.end(), 0.0);
    for (int u = 0; u < num_actions; ++u) {
      const double gap = raw[static_cast<std::size_t>(u)] -
                         raw[static_cast<std::size_t>(arg_max)] -
                         targets[i][static_cast<std::size_t>(u)];
      loss += gap * gap;
      const double c = 2.0 * gap * inv_batch;
      cotangent[static_cast<std::size_t>(u)] += c;
      cotangent[static_cast<std::size_t>(arg_max)] -= c;
    }
    if (grads) advantage_net.add_param_grads(cache, cotangent, 1.0, *grads);
  }
  return loss * inv_batch;
}

ValueTrainResult collocation_train_value(const PomdpModel& model,
                                         const CollocationConfig& config,
                                         std::uint64_t seed) {
  model.require_valid();
  if (config.episodes <= 0 || config.batch_size <= 0 || config.steps_per_batch <= 0)
    throw std::invalid_argument("collocation_train_value: counts must be positive");

  Rng rng(seed);
  nn::Mlp net = nn::Mlp::value_net(model.num_states);
  net.init_params(rng);
  nn::Adam adam(net, config.adam);
  detail::ValueContext ctx(model, net);
  nn::Grads grads = net.make_grads();
  const double value_sign = config.printed_sign_variant ? 1.0 : -1.0;
  const double tau_min = config.tau_min_factor * model.discount;

  ValueTrainResult result;
  result.loss_trace.reserve(static_cast<std::size_t>(config.episodes));
  std::vector<Belief> batch(static_cast<std::size_t>(config.batch_size));
  std::vector<int> best_actions(static_cast<std::size_t>(config.batch_size));
  long opt_step = 0;

  for (long episode = 0; episode < config.episodes; ++episode) {
    for (auto& b : batch)
      b = sample_collocation_belief(model.num_states, config.dirichlet_alpha, rng);
    double episode_loss = 0.0;
    for (int step = 0; step < config.steps_per_batch; ++step) {
      const double tau = discount_schedule(opt_step, model.discount,
                                           config.discount_decay_steps, tau_min);
      for (std::size_t i = 0; i < batch.size(); ++i) {
        ctx.set_belief(batch[i]);
        int best_u = 0;
        double best_a = context_residual(model, ctx, 0, tau, value_sign);
        for (int u = 1; u < model.num_actions; ++u) {
          const double a = context_residual(model, ctx, u, tau, value_sign);
          if (a > best_a) {
            best_a = a;
            best_u = u;
          }
        }
        best_actions[i] = best_u;
      }
      const double loss =
          value_residual_batch(model, net, batch, best_actions, tau,
                               config.printed_sign_variant, &grads);
      if (!std::isfinite(loss)) {
        std::ostringstream os;
        os << "collocation_train_value: loss diverged at episode " << episode
           << " step " << step;
        throw std::runtime_error(os.str());
      }
      if (step == 0) episode_loss = loss;
      adam.step(net, grads);
      ++opt_step;
    }
    result.loss_trace.push_back(episode_loss);
  }
  result.net = std::move(net);
  return result;
}

AdvantageFitResult fit_advantage(const PomdpModel& model,
                                 const nn::Mlp& value_net,
                                 const CollocationConfig& config,
                                 std::uint64_t seed) {
  model.require_valid();
  if (value_net.in_dim() != model.num_states)
    throw std::invalid_argument("fit_advantage: value net dimension mismatch");

  Rng rng(seed);
  nn::Mlp net = nn::Mlp::advantage_net(model.num_states, model.num_actions);
  net.init_params(rng);
  nn::Adam adam(net, config.adam);
  detail::ValueContext ctx(model, value_net);
  nn::Grads grads = net.make_grads();
  const double value_sign = config.printed_sign_variant ? 1.0 : -1.0;
  const double tau = model.discount;
  const long episodes =
      config.advantage_episodes >= 0 ? config.advantage_episodes : config.episodes;

  AdvantageFitResult result;
  result.loss_trace.reserve(static_cast<std::size_t>(episodes));
  std::vector<Belief> batch(static_cast<std::size_t>(config.batch_size));
  std::vector<std::vector<double>> targets(
      static_cast<std::size_t>(config.batch_size),
      std::vector<double>(static_cast<std::size_t>(model.num_actions)));

  for (long episode = 0; episode < episodes; ++episode) {
    for (std::size_t i = 0; i < batch.size(); ++i) {
      batch[i] =
          sample_collocation_belief(model.num_states, config.dirichlet_alpha, rng);
      ctx.set_belief(batch[i]);
      for (int u = 0; u < model.num_actions; ++u)
        targets[i][static_cast<std::size_t>(u)] =
            context_residual(model, ctx, u, tau, value_sign);
    }
    const double loss = advantage_fit_batch(net, batch, targets, &grads);
    if (!std::isfinite(loss)) {
      std::ostringstream os;
      os << "fit_advantage: loss diverged at episode " << episode;
      throw std::runtime_error(os.str());
    }
    adam.step(net, grads);
    result.loss_trace.push_back(loss);
  }
  result.net = std::move(net);
  return result;
}

std::vector<double> reparameterized_advantages(const nn::Mlp& advantage_net,
                                               const Belief& belief) {
  auto out = advantage_net.forward(belief.p);
  double best = out[0];
  for (double v : out) best = std::max(best, v);
  for (double& v : out) v -= best;
  return out;
}

int greedy_action(const nn::Mlp& advantage_net, const Belief& belief) {
  const auto out = advantage_net.forward(belief.p);
  int arg_max = 0;
  for (std::size_t u = 1; u < out.size(); ++u)
    if (out[u] > out[static_cast<std::size_t>(arg_max)])
      arg_max = static_cast<int>(u);
  return arg_max;
}

}  // namespace ctpomdp::hjb
