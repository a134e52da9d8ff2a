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

#include "ctpomdp/filter.hpp"

#include <cmath>
#include <stdexcept>

namespace ctpomdp::filter {

std::vector<double> drift(const PomdpModel& model, const Belief& belief, int u) {
  model.check_action(u);
  if (belief.size() != model.num_states)
    throw std::invalid_argument("drift: belief dimension mismatch");
  std::vector<double> out(static_cast<std::size_t>(model.num_states));
  drift_into(model, belief.p, u, out);
  return out;
}

void drift_into(const PomdpModel& model, std::span<const double> belief, int u,
                std::span<double> out) {
  const int n = model.num_states;
  for (int x = 0; x < n; ++x) out[static_cast<std::size_t>(x)] = 0.0;
  // Accumulate row-wise so each generator row is walked contiguously.
  for (int from = 0; from < n; ++from) {
    const double mass = belief[static_cast<std::size_t>(from)];
    if (mass == 0.0) continue;
    auto row = model.rate_row(u, from);
    for (int to = 0; to < n; ++to) {
      out[static_cast<std::size_t>(to)] += row[static_cast<std::size_t>(to)] * mass;
    }
  }
}

void rk4_step(const PomdpModel& model, Belief& belief, int u, double h,
              Renormalization renorm) {
  const auto n = static_cast<std::size_t>(model.num_states);
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  const auto& p0 = belief.p;

  drift_into(model, p0, u, k1);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = p0[i] + 0.5 * h * k1[i];
  drift_into(model, tmp, u, k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = p0[i] + 0.5 * h * k2[i];
  drift_into(model, tmp, u, k3);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = p0[i] + h * k3[i];
  drift_into(model, tmp, u, k4);
  for (std::size_t i = 0; i < n; ++i) {
    belief.p[i] = p0[i] + h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
    if (!std::isfinite(belief.p[i]))
      throw std::runtime_error(
          "propagate: non-finite belief component, step size too large");
  }
  if (renorm == Renormalization::kClipAndNormalize) belief.clip_and_normalize();
}

Belief propagate(const PomdpModel& model, const Belief& belief,
                 const ActionSource& action_of_t, double t0, double t1,
                 const IntegratorConfig& config) {
  if (t1 < t0) throw std::invalid_argument("propagate: t1 must be >= t0");
  if (!(config.dt > 0.0)) throw std::invalid_argument("propagate: dt must be > 0");
  if (belief.size() != model.num_states)
    throw std::invalid_argument("propagate: belief dimension mismatch");

  Belief current = belief;
  double t = t0;
  // Full steps of dt, then one partial step for the remainder. The action is
  // sampled at the start of each sub-step and held constant across the RK4
  // stages (the controls in this toolkit are piecewise constant at dt scale).
  while (t < t1) {
    const double h = std::min(config.dt, t1 - t);
    if (h <= 0.0) break;
    const int u = action_of_t(t);
    model.check_action(u);
    rk4_step(model, current, u, h, config.renormalization);
    t += h;
  }
  return current;
}

double observation_marginal(const PomdpModel& model, const Belief& belief,
                            int u, int y) {
  model.check_action(u);
  model.check_observation(y);
  double total = 0.0;
  for (int x = 0; x < model.num_states; ++x)
    total += model.likelihood(u, x, y) * belief[x];
  return total;
}

Belief bayes_reset(const PomdpModel& model, const Belief& belief, int u, int y) {
  const double marginal = observation_marginal(model, belief, u, y);
  if (!(marginal > 0.0)) {
    throw std::domain_error(
        "bayes_reset: observation has zero probability under the belief");
  }
  Belief posterior(model.num_states);
  for (int x = 0; x < model.num_states; ++x)
    posterior[x] = model.likelihood(u, x, y) * belief[x] / marginal;
  return posterior;
}

PosteriorEnsemble posterior_ensemble(const PomdpModel& model,
                                     const Belief& belief, int u) {
  PosteriorEnsemble ensemble;
  ensemble.entries.reserve(static_cast<std::size_t>(model.num_observations));
  for (int y = 0; y < model.num_observations; ++y) {
    PosteriorEntry entry;
    entry.y = y;
    entry.weight = observation_marginal(model, belief, u, y);
    if (entry.weight > 0.0) {
      entry.posterior = Belief(model.num_states);
      for (int x = 0; x < model.num_states; ++x)
        entry.posterior[x] = model.likelihood(u, x, y) * belief[x] / entry.weight;
    } else {
      entry.posterior = belief;
      entry.defined = false;
    }
    ensemble.entries.push_back(std::move(entry));
  }
  return ensemble;
}

}  // namespace ctpomdp::filter
