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

#ifndef CTPOMDP_SRC_VALUE_CONTEXT_HPP_
#define CTPOMDP_SRC_VALUE_CONTEXT_HPP_

#include <optional>
#include <vector>

#include "ctpomdp/filter.hpp"
#include "ctpomdp/model.hpp"
#include "ctpomdp/nn.hpp"

namespace ctpomdp::detail {

// Per-belief evaluation context for residual training with an MLP value net:
// caches the forward pass, the input gradient, per-action drift vectors and
// the Bayes posterior values (with their forward caches, so every term can be
// backpropagated into parameter space). Posterior work is shared across
// actions when the observation likelihood is action-independent.
class ValueContext {
 public:
  ValueContext(const PomdpModel& model, const nn::Mlp& value_net)
      : model_(&model),
        net_(&value_net),
        shared_likelihood_(model.obs_likelihood_action_independent()),
        drifts_(static_cast<std::size_t>(model.num_actions)),
        ensembles_(static_cast<std::size_t>(model.num_actions)) {}

  void set_belief(const Belief& belief) {
    belief_ = belief;
    value_ = net_->forward_scalar(belief.p, &cache_);
    messages_ = net_->gradient_messages(cache_);
    gradient_ = net_->input_gradient(cache_, messages_);
    for (auto& d : drifts_) d.reset();
    for (auto& e : ensembles_) e.reset();
  }

  const Belief& belief() const { return belief_; }
  double value() const { return value_; }
  const std::vector<double>& gradient() const { return gradient_; }

  const std::vector<double>& drift(int u) {
    auto& slot = drifts_[static_cast<std::size_t>(u)];
    if (!slot) slot = filter::drift(*model_, belief_, u);
    return *slot;
  }

  // dV/dpi . f(pi, u)
  double drift_dot(int u) {
    const auto& f = drift(u);
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) acc += gradient_[i] * f[i];
    return acc;
  }

  // sum_y p(y) V(pi+_y), zero-weight entries skipped.
  double jump_expectation(int u) {
    const auto& ens = ensemble(u);
    double acc = 0.0;
    for (const auto& e : ens.entries) {
      if (e.weight > 0.0) acc += e.weight * e.value;
    }
    return acc;
  }

  double jump_gap(int u) { return jump_expectation(u) - value_; }

  // Accumulates cot * d V(pi) / d params.
  void add_value_param_grads(double cot, nn::Grads& grads) const {
    const double one = cot;
    net_->add_param_grads(cache_, std::span<const double>(&one, 1), 1.0, grads);
  }

  // Accumulates cot * d (dV/dpi . f(pi, u)) / d params.
  void add_drift_param_grads(int u, double cot, nn::Grads& grads) {
    const auto& f = drift(u);
    nn::Mlp::TangentCache tangent;
    net_->directional_derivative(cache_, f, &tangent);
    const double one = cot;
    net_->add_directional_param_grads(cache_, tangent,
                                      std::span<const double>(&one, 1), 1.0,
                                      grads);
  }

  // Accumulates cot * d (sum_y p(y) V(pi+_y)) / d params.
  void add_jump_param_grads(int u, double cot, nn::Grads& grads) {
    const auto& ens = ensemble(u);
    for (const auto& e : ens.entries) {
      if (e.weight <= 0.0) continue;
      const double c = cot * e.weight;
      net_->add_param_grads(e.cache, std::span<const double>(&c, 1), 1.0, grads);
    }
  }

 private:
  struct PosteriorValue {
    double weight = 0.0;
    double value = 0.0;
    nn::Mlp::Cache cache;
  };
  struct Ensemble {
    std::vector<PosteriorValue> entries;
  };

  const Ensemble& ensemble(int u) {
    const int slot_index = shared_likelihood_ ? 0 : u;
    auto& slot = ensembles_[static_cast<std::size_t>(slot_index)];
    if (!slot) {
      Ensemble built;
      const auto raw = filter::posterior_ensemble(*model_, belief_, slot_index);
      built.entries.resize(raw.entries.size());
      for (std::size_t i = 0; i < raw.entries.size(); ++i) {
        auto& dst = built.entries[i];
        dst.weight = raw.entries[i].weight;
        if (raw.entries[i].defined && dst.weight > 0.0) {
          dst.value = net_->forward_scalar(raw.entries[i].posterior.p, &dst.cache);
        }
      }
      slot = std::move(built);
    }
    return *slot;
  }

  const PomdpModel* model_;
  const nn::Mlp* net_;
  bool shared_likelihood_;
  Belief belief_;
  nn::Mlp::Cache cache_;
  nn::Mlp::GradientMessages messages_;
  double value_ = 0.0;
  std::vector<double> gradient_;
  std::vector<std::optional<std::vector<double>>> drifts_;
  std::vector<std::optional<Ensemble>> ensembles_;
};

}  // namespace ctpomdp::detail

#endif  // CTPOMDP_SRC_VALUE_CONTEXT_HPP_
