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

#include <benchmark/benchmark.h>

#include "ctpomdp/au.hpp"
#include "ctpomdp/envs.hpp"
#include "ctpomdp/filter.hpp"
#include "ctpomdp/hjb.hpp"
#include "ctpomdp/nn.hpp"
#include "ctpomdp/rng.hpp"
#include "ctpomdp/sim.hpp"

namespace {

using namespace ctpomdp;

Belief random_belief(int n, Rng& rng) { return Belief(rng.dirichlet(0.5, n)); }

void BM_FilterPropagate(benchmark::State& state) {
  const auto m = envs::build_gridworld();
  Rng rng(1);
  const auto b = random_belief(36, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        filter::propagate(m, b, [](double) { return 0; }, 0.0, 1.0));
  }
}
BENCHMARK(BM_FilterPropagate);

void BM_BayesReset(benchmark::State& state) {
  const auto m = envs::build_gridworld();
  Rng rng(2);
  const auto b = random_belief(36, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(filter::bayes_reset(m, b, 0, 14));
  }
}
BENCHMARK(BM_BayesReset);

void BM_PosteriorEnsemble(benchmark::State& state) {
  const auto m = envs::build_slotted_aloha();
  Rng rng(3);
  const auto b = random_belief(30, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(filter::posterior_ensemble(m, b, 4));
  }
}
BENCHMARK(BM_PosteriorEnsemble);

void BM_MlpForward(benchmark::State& state) {
  nn::Mlp net = nn::Mlp::value_net(36);
  Rng rng(4);
  net.init_params(rng);
  const auto b = random_belief(36, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(net.forward_scalar(b.p));
  }
}
BENCHMARK(BM_MlpForward);

void BM_MlpInputGradient(benchmark::State& state) {
  nn::Mlp net = nn::Mlp::value_net(36);
  Rng rng(5);
  net.init_params(rng);
  const auto b = random_belief(36, rng);
  nn::Mlp::Cache cache;
  net.forward_scalar(b.p, &cache);
  for (auto _ : state) {
    benchmark::DoNotOptimize(net.input_gradient(cache));
  }
}
BENCHMARK(BM_MlpInputGradient);

void BM_MlpInputHessian(benchmark::State& state) {
  nn::Mlp net = nn::Mlp::value_net(36);
  Rng rng(6);
  net.init_params(rng);
  const auto b = random_belief(36, rng);
  nn::Mlp::Cache cache;
  net.forward_scalar(b.p, &cache);
  const auto messages = net.gradient_messages(cache);
  for (auto _ : state) {
    benchmark::DoNotOptimize(net.input_hessian(cache, messages));
  }
}
BENCHMARK(BM_MlpInputHessian);

void BM_AdvantageResidual(benchmark::State& state) {
  const auto m = envs::build_gridworld();
  nn::Mlp net = nn::Mlp::value_net(36);
  Rng rng(7);
  net.init_params(rng);
  const auto b = random_belief(36, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hjb::advantage_residual(m, net, b, 2));
  }
}
BENCHMARK(BM_AdvantageResidual);

void BM_ValueResidualBatchGrad(benchmark::State& state) {
  const auto m = envs::build_gridworld();
  nn::Mlp net = nn::Mlp::value_net(36);
  Rng rng(8);
  net.init_params(rng);
  std::vector<Belief> beliefs;
  std::vector<int> actions;
  for (int i = 0; i < 256; ++i) {
    beliefs.push_back(hjb::sample_collocation_belief(36, 0.1, rng));
    actions.push_back(rng.uniform_int(4));
  }
  auto grads = net.make_grads();
  for (auto _ : state) {
    benchmark::DoNotOptimize(hjb::value_residual_batch(
        m, net, beliefs, actions, m.discount, false, &grads));
  }
}
BENCHMARK(BM_ValueResidualBatchGrad);

void BM_SimulateEpisodeTiger(benchmark::State& state) {
  const auto m = envs::build_tiger();
  ConstantPolicy listen(0);
  auto sampler = [](Rng& r) {
    const double a = r.uniform();
    return Belief{a, 1.0 - a};
  };
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sim::simulate_episode(m, listen, 10.0, sampler, seed++));
  }
}
BENCHMARK(BM_SimulateEpisodeTiger);

void BM_SimulateEpisodeGridworld(benchmark::State& state) {
  const auto m = envs::build_gridworld();
  ConstantPolicy up(0);
  auto sampler = [](Rng& r) { return Belief(r.dirichlet(0.1, 36)); };
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sim::simulate_episode(m, up, 1.0, sampler, seed++));
  }
}
BENCHMARK(BM_SimulateEpisodeGridworld);

}  // namespace

BENCHMARK_MAIN();
