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

#ifndef CTPOMDP_FILTER_HPP_
#define CTPOMDP_FILTER_HPP_

#include <functional>
#include <vector>

#include "ctpomdp/model.hpp"

namespace ctpomdp::filter {

/// Action as a function of time, for integrating the belief under a known
/// control schedule.
using ActionSource = std::function<int(double t)>;

enum class Renormalization { kClipAndNormalize, kNone };

struct IntegratorConfig {
  double dt = 1e-3;  // fixed step size, time units
  /// Fixed-step classical 4th-order Runge-Kutta is the only method; the tag
  /// exists so configs are explicit about it.
  enum class Method { kRk4 } method = Method::kRk4;
  Renormalization renormalization = Renormalization::kClipAndNormalize;
};

/// Time derivative of the belief under action u:
/// d pi(x)/dt = sum_x' rate(u, x', x) pi(x'). Components sum to zero.
std::vector<double> drift(const PomdpModel& model, const Belief& belief, int u);

/// In-place drift evaluation into `out` (size num_states), for hot loops.
void drift_into(const PomdpModel& model, std::span<const double> belief, int u,
                std::span<double> out);

/// Integrates the belief from t0 to t1 under the action source with fixed-
/// step RK4, querying the action at every stage time. Each step is followed
/// by clip-and-renormalize (unless disabled). Throws on non-finite values
/// (step size too large for the rates).
Belief propagate(const PomdpModel& model, const Belief& belief,
                 const ActionSource& action_of_t, double t0, double t1,
                 const IntegratorConfig& config = {});

/// Single RK4 step over [t, t + h] under a constant action.
void rk4_step(const PomdpModel& model, Belief& belief, int u, double h,
              Renormalization renorm = Renormalization::kClipAndNormalize);

/// Posterior belief after observing y under action u:
/// pi+(x) = p(y | x, u) pi(x) / p(y). Throws std::domain_error if the
/// marginal p(y) is zero (model/observation mismatch).
Belief bayes_reset(const PomdpModel& model, const Belief& belief, int u, int y);

/// Marginal observation probability p(y) = sum_x p(y | x, u) pi(x).
double observation_marginal(const PomdpModel& model, const Belief& belief,
                            int u, int y);

struct PosteriorEntry {
  int y = -1;
  double weight = 0.0;  // marginal p(y)
  Belief posterior;
  /// False when the marginal is zero; the posterior then just carries the
  /// prior and must not be used in expectations.
  bool defined = true;
};

/// Full Bayes ensemble over the finite observation space: one entry per y
/// with its marginal weight and posterior. Weights sum to one and the
/// weight-mixture of posteriors reproduces the prior.
struct PosteriorEnsemble {
  std::vector<PosteriorEntry> entries;
};

PosteriorEnsemble posterior_ensemble(const PomdpModel& model,
                                     const Belief& belief, int u);

}  // namespace ctpomdp::filter

#endif  // CTPOMDP_FILTER_HPP_
