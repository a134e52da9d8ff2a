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

#ifndef CTPOMDP_HJB_HPP_
#define CTPOMDP_HJB_HPP_

#include <cstdint>
#include <vector>

#include "ctpomdp/filter.hpp"
#include "ctpomdp/model.hpp"
#include "ctpomdp/nn.hpp"
#include "ctpomdp/rng.hpp"

namespace ctpomdp::hjb {

/// Differentiable value function over beliefs. The trainers use MLP-backed
/// instances; tests plug in analytic functions.
class ValueFunction {
 public:
  virtual ~ValueFunction() = default;
  virtual double value(const Belief& belief) const = 0;
  virtual std::vector<double> gradient(const Belief& belief) const = 0;
};

class MlpValueFunction final : public ValueFunction {
 public:
  explicit MlpValueFunction(const nn::Mlp& net) : net_(&net) {}
  double value(const Belief& belief) const override;
  std::vector<double> gradient(const Belief& belief) const override;

 private:
  const nn::Mlp* net_;
};

struct ResidualOptions {
  /// Discount time constant; negative means "use the model's".
  double tau = -1.0;
  /// Adds V(pi) instead of subtracting it, reproducing the printed variant
  /// of the batched advantage formula for comparison runs.
  bool printed_sign_variant = false;
};

/// The jump-diffusion residual term by term. The filter dynamics carry no
/// dispersion (the belief moves deterministically between observation
/// resets), so the diffusion trace is identically zero here; the slot is
/// kept so the residual mirrors the general form one-to-one.
struct ResidualTerms {
  double expected_reward = 0.0;
  double value = 0.0;      // -V(pi), or +V(pi) in the printed variant
  double drift = 0.0;      // tau * dV/dpi . f(pi, u)
  double diffusion = 0.0;  // tau/2 * tr(d2V/dpi2 G G^T); G = 0 for this filter
  double jump = 0.0;       // tau * lambda(u) * (sum_y p(y) V(pi+_y) - V(pi))
  double total() const {
    return expected_reward + value + drift + diffusion + jump;
  }
};

ResidualTerms advantage_residual_terms(const PomdpModel& model,
                                       const ValueFunction& value,
                                       const Belief& belief, int u,
                                       const ResidualOptions& options = {});

/// Belief-space HJB advantage residual for the continuous-discrete filter:
///   A(pi, u) = E[R | pi, u] - V(pi) + tau * dV/dpi . f(pi, u)
///            + tau * lambda(u) * (sum_y p(y) V(pi+_y) - V(pi)).
/// Zero-weight observations are skipped.
double advantage_residual(const PomdpModel& model, const ValueFunction& value,
                          const Belief& belief, int u,
                          const ResidualOptions& options = {});

double advantage_residual(const PomdpModel& model, const nn::Mlp& value_net,
                          const Belief& belief, int u,
                          const ResidualOptions& options = {});

/// Linear warm-up of the discount time constant: tau_min at step 0 up to the
/// target at `horizon` steps and constant afterwards. A negative tau_min
/// defaults to 0.1 * target.
double discount_schedule(long step, double target_tau, long horizon = 500,
                         double tau_min = -1.0);

/// Base distribution for collocation beliefs and initial beliefs: uniform
/// over the first coordinate for two-state models, symmetric Dirichlet
/// otherwise.
Belief sample_collocation_belief(int num_states, double alpha, Rng& rng);

struct CollocationConfig {
  long episodes = 10000;  // fresh sample batches for the value fit
  int batch_size = 256;
  int steps_per_batch = 1;
  double dirichlet_alpha = 0.1;
  long discount_decay_steps = 500;
  double tau_min_factor = 0.1;
  nn::AdamConfig adam;
  /// Batches for the advantage fit; negative means "same as episodes".
  long advantage_episodes = -1;
  bool printed_sign_variant = false;
};

/// Mean squared residual over (belief, action) pairs; when `grads` is given,
/// also accumulates d loss / d params of the value net into it (the grads are
/// zeroed first). This is the exact objective the value trainer steps on.
double value_residual_batch(const PomdpModel& model, const nn::Mlp& value_net,
                            std::span<const Belief> beliefs,
                            std::span<const int> actions, double tau,
                            bool printed_sign_variant, nn::Grads* grads);

/// Mean over beliefs of the summed squared advantage-fit gaps
/// sum_u (Abar(pi,u) - max_u' Abar(pi,u') - target(u))^2, with optional
/// parameter gradients of the advantage net (argmax held fixed per sample).
double advantage_fit_batch(const nn::Mlp& advantage_net,
                           std::span<const Belief> beliefs,
                           std::span<const std::vector<double>> targets,
                           nn::Grads* grads);

struct ValueTrainResult {
  nn::Mlp net;
  std::vector<double> loss_trace;  // mean squared best-action residual per batch
};

/// Offline value training: per batch, sample beliefs from the base
/// distribution, pick the best action by residual, and take one Adam step on
/// the mean squared best-action residual, with the discount warm-up applied.
/// Throws std::runtime_error (with diagnostics) if the loss diverges.
ValueTrainResult collocation_train_value(const PomdpModel& model,
                                         const CollocationConfig& config,
                                         std::uint64_t seed);

struct AdvantageFitResult {
  nn::Mlp net;
  std::vector<double> loss_trace;
};

/// Fits the reparameterized advantage net to the residuals of a trained
/// value net: minimizes the squared gap between Abar(pi,u) - max_u' Abar and
/// the value-net residual A(pi,u), over fresh base-distribution batches.
AdvantageFitResult fit_advantage(const PomdpModel& model,
                                 const nn::Mlp& value_net,
                                 const CollocationConfig& config,
                                 std::uint64_t seed);

/// Reparameterized advantages A(pi, u) = Abar(pi, u) - max_u' Abar(pi, u');
/// the maximum entry is exactly zero.
std::vector<double> reparameterized_advantages(const nn::Mlp& advantage_net,
                                               const Belief& belief);

/// Greedy action of the advantage net; ties break to the lowest index.
int greedy_action(const nn::Mlp& advantage_net, const Belief& belief);

class GreedyAdvantagePolicy final : public Policy {
 public:
  explicit GreedyAdvantagePolicy(const nn::Mlp& advantage_net)
      : net_(&advantage_net) {}
  int action(const Belief& belief, double) override {
    return greedy_action(*net_, belief);
  }

 private:
  const nn::Mlp* net_;
};

}  // namespace ctpomdp::hjb

#endif  // CTPOMDP_HJB_HPP_
