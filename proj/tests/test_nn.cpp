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

#include "ctpomdp/nn.hpp"

#include <stdexcept>
#include <cmath>
#include <limits>
#include <vector>

#include "ctpomdp/rng.hpp"
#include "doctest.h"
#include "support/finite_diff.hpp"

using namespace ctpomdp;
using nn::Mlp;

namespace {

double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

Mlp random_net(const std::vector<int>& sizes, std::uint64_t seed) {
  Mlp net(sizes);
  Rng rng(seed);
  net.init_params(rng);
  // Nonzero biases exercise every term of the recursions.
  for (auto& layer : net.layers())
    for (auto& b : layer.b) b = rng.uniform(-0.5, 0.5);
  return net;
}

std::vector<double> random_input(int n, Rng& rng) {
  std::vector<double> x(static_cast<std::size_t>(n));
  for (auto& v : x) v = rng.uniform(-1.0, 1.0);
  return x;
}

// Flattens all parameters for finite differencing.
std::vector<double*> parameter_pointers(Mlp& net) {
  std::vector<double*> ptrs;
  for (auto& layer : net.layers()) {
    for (auto& w : layer.w) ptrs.push_back(&w);
    for (auto& b : layer.b) ptrs.push_back(&b);
  }
  return ptrs;
}

std::vector<double> flatten(const nn::Grads& grads) {
  std::vector<double> out;
  for (const auto& layer : grads.layers) {
    out.insert(out.end(), layer.w.begin(), layer.w.end());
    out.insert(out.end(), layer.b.begin(), layer.b.end());
  }
  return out;
}

}  // namespace

TEST_CASE("forward with zero parameters is the output bias") {
  Mlp net({3, 3, 3, 1});
  CHECK(net.forward_scalar(std::vector<double>{0.2, -0.4, 0.9}) ==
        doctest::Approx(0.0));
  net.layers().back().b[0] = 1.25;
  CHECK(net.forward_scalar(std::vector<double>{0.2, -0.4, 0.9}) ==
        doctest::Approx(1.25));
}

TEST_CASE("forward matches a hand-evaluated 1-1-1-1 sigmoid composition") {
  Mlp net({1, 1, 1, 1});
  net.layers()[0].w = {1.3};
  net.layers()[0].b = {-0.2};
  net.layers()[1].w = {-0.7};
  net.layers()[1].b = {0.4};
  net.layers()[2].w = {2.0};
  net.layers()[2].b = {0.05};
  const double x = 0.6;
  const double z0 = sigmoid(1.3 * x - 0.2);
  const double z1 = sigmoid(-0.7 * z0 + 0.4);
  const double expected = 2.0 * z1 + 0.05;
  CHECK(net.forward_scalar(std::vector<double>{x}) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("task network shapes") {
  const auto value = Mlp::value_net(30);
  CHECK(value.in_dim() == 30);
  CHECK(value.out_dim() == 1);
  CHECK(value.num_hidden() == 2);
  CHECK(value.layers()[0].out == 30);
  CHECK(value.layers()[1].out == 30);
  const auto advantage = Mlp::advantage_net(30, 9);
  CHECK(advantage.in_dim() == 30);
  CHECK(advantage.out_dim() == 9);
}

TEST_CASE("input gradient is zero for zero weights") {
  Mlp net({4, 4, 4, 1});
  net.layers().back().b[0] = 3.0;
  Mlp::Cache cache;
  net.forward_scalar(std::vector<double>{0.1, 0.2, 0.3, 0.4}, &cache);
  const auto grad = net.input_gradient(cache);
  for (double g : grad) CHECK(g == 0.0);
}

TEST_CASE("input gradient matches central finite differences") {
  Rng rng(314);
  const double step = 1e-5;
  for (int trial = 0; trial < 100; ++trial) {
    const int in = 2 + rng.uniform_int(5);
    const auto net = random_net({in, in, in, 1}, 1000 + trial);
    const auto x = random_input(in, rng);
    Mlp::Cache cache;
    net.forward_scalar(x, &cache);
    const auto analytic = net.input_gradient(cache);
    const auto numeric = test_support::central_gradient(
        [&](const std::vector<double>& p) { return net.forward_scalar(p); }, x,
        step);
    const double scale = std::max(test_support::max_abs(numeric), 1e-3);
    CHECK(test_support::max_abs_diff(analytic, numeric) / scale <= 1e-5);
  }
}

TEST_CASE("input gradient of a single-unit chain matches the chain rule") {
  Mlp net({1, 1, 1, 1});
  net.layers()[0].w = {0.9};
  net.layers()[0].b = {0.1};
  net.layers()[1].w = {-1.4};
  net.layers()[1].b = {-0.3};
  net.layers()[2].w = {0.8};
  net.layers()[2].b = {0.0};
  const double x = -0.35;
  Mlp::Cache cache;
  net.forward_scalar(std::vector<double>{x}, &cache);
  const auto grad = net.input_gradient(cache);
  const double z0 = sigmoid(0.9 * x + 0.1);
  const double z1 = sigmoid(-1.4 * z0 - 0.3);
  const double expected = 0.8 * (z1 * (1 - z1)) * (-1.4) * (z0 * (1 - z0)) * 0.9;
  CHECK(grad[0] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("input hessian is zero for zero weights") {
  Mlp net({3, 3, 3, 1});
  Mlp::Cache cache;
  net.forward_scalar(std::vector<double>{0.5, -0.5, 0.25}, &cache);
  for (double h : net.input_hessian(cache)) CHECK(h == 0.0);
}

TEST_CASE("input hessian is symmetric and matches differentiated gradients") {
  Rng rng(2718);
  const double step = 1e-4;
  for (int trial = 0; trial < 100; ++trial) {
    const int in = 2 + rng.uniform_int(4);
    const auto net = random_net({in, in, in, 1}, 5000 + trial);
    const auto x = random_input(in, rng);
    Mlp::Cache cache;
    net.forward_scalar(x, &cache);
    const auto hessian = net.input_hessian(cache);

    // Structural symmetry.
    for (int i = 0; i < in; ++i)
      for (int j = 0; j < in; ++j)
        CHECK(std::abs(hessian[static_cast<std::size_t>(i * in + j)] -
                       hessian[static_cast<std::size_t>(j * in + i)]) <= 1e-10);

    // Central differences of the analytic gradient.
    const auto numeric_rows = test_support::central_jacobian(
        [&](const std::vector<double>& p) {
          Mlp::Cache c;
          net.forward_scalar(p, &c);
          return net.input_gradient(c);
        },
        x, step);
    double max_diff = 0.0, scale = 1e-3;
    for (int i = 0; i < in; ++i) {
      for (int j = 0; j < in; ++j) {
        const double numeric = numeric_rows[static_cast<std::size_t>(i)]
                                           [static_cast<std::size_t>(j)];
        scale = std::max(scale, std::abs(numeric));
        max_diff = std::max(
            max_diff,
            std::abs(hessian[static_cast<std::size_t>(i * in + j)] - numeric));
      }
    }
    CHECK(max_diff / scale <= 1e-4);
  }
}

TEST_CASE("one forward pass serves value, gradient and hessian consistently") {
  const auto net = random_net({5, 5, 5, 1}, 31337);
  Rng rng(5);
  const auto x = random_input(5, rng);

  Mlp::Cache combined_cache;
  const double value = net.forward_scalar(x, &combined_cache);
  const auto messages = net.gradient_messages(combined_cache);
  const auto grad_combined = net.input_gradient(combined_cache, messages);
  const auto hess_combined = net.input_hessian(combined_cache, messages);

  Mlp::Cache c1, c2;
  CHECK(net.forward_scalar(x, &c1) == value);
  CHECK(net.input_gradient(c1) == grad_combined);
  net.forward_scalar(x, &c2);
  CHECK(net.input_hessian(c2) == hess_combined);
}

TEST_CASE("parameter gradients match central finite differences") {
  Rng rng(161803);
  const double step = 1e-5;
  for (int trial = 0; trial < 25; ++trial) {
    auto net = random_net({3, 3, 3, 2}, 900 + trial);
    const auto x = random_input(3, rng);
    const std::vector<double> cotangent = {rng.uniform(-1, 1), rng.uniform(-1, 1)};

    Mlp::Cache cache;
    net.forward(x, &cache);
    auto grads = net.make_grads();
    net.add_param_grads(cache, cotangent, 1.0, grads);
    const auto analytic = flatten(grads);

    auto loss = [&]() {
      const auto out = net.forward(x);
      return cotangent[0] * out[0] + cotangent[1] * out[1];
    };
    std::vector<double> numeric;
    for (double* p : parameter_pointers(net)) {
      const double saved = *p;
      *p = saved + step;
      const double plus = loss();
      *p = saved - step;
      const double minus = loss();
      *p = saved;
      numeric.push_back((plus - minus) / (2.0 * step));
    }
    const double scale = std::max(test_support::max_abs(numeric), 1e-3);
    CHECK(test_support::max_abs_diff(analytic, numeric) / scale <= 1e-5);
  }
}

TEST_CASE("zero cotangent yields zero parameter gradients") {
  const auto net = random_net({3, 3, 3, 2}, 77);
  Mlp::Cache cache;
  net.forward(std::vector<double>{0.1, 0.2, 0.3}, &cache);
  auto grads = net.make_grads();
  net.add_param_grads(cache, std::vector<double>{0.0, 0.0}, 1.0, grads);
  for (double g : flatten(grads)) CHECK(g == 0.0);
}

TEST_CASE("mini-batch gradient equals the mean of per-sample gradients") {
  const auto net = random_net({2, 2, 2, 1}, 4711);
  Rng rng(12);
  std::vector<std::vector<double>> batch;
  for (int i = 0; i < 8; ++i) batch.push_back(random_input(2, rng));

  auto accumulated = net.make_grads();
  for (const auto& x : batch) {
    Mlp::Cache cache;
    net.forward_scalar(x, &cache);
    const double one = 1.0;
    net.add_param_grads(cache, std::span<const double>(&one, 1),
                        1.0 / static_cast<double>(batch.size()), accumulated);
  }
  auto mean_of_grads = net.make_grads();
  for (const auto& x : batch) {
    Mlp::Cache cache;
    net.forward_scalar(x, &cache);
    auto single = net.make_grads();
    const double one = 1.0;
    net.add_param_grads(cache, std::span<const double>(&one, 1), 1.0, single);
    mean_of_grads.add_scaled(single, 1.0 / static_cast<double>(batch.size()));
  }
  const auto a = flatten(accumulated);
  const auto b = flatten(mean_of_grads);
  CHECK(test_support::max_abs_diff(a, b) <= 1e-12);
}

TEST_CASE("directional derivative agrees with the gradient dot product") {
  const auto net = random_net({4, 4, 4, 1}, 60221);
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = random_input(4, rng);
    const auto dir = random_input(4, rng);
    Mlp::Cache cache;
    net.forward_scalar(x, &cache);
    const auto grad = net.input_gradient(cache);
    double dot = 0.0;
    for (std::size_t i = 0; i < grad.size(); ++i) dot += grad[i] * dir[i];
    const auto jvp = net.directional_derivative(cache, dir);
    CHECK(jvp[0] == doctest::Approx(dot).epsilon(1e-12));
  }
}

TEST_CASE("directional-derivative parameter gradients match finite differences") {
  Rng rng(987);
  const double step = 1e-5;
  for (int trial = 0; trial < 25; ++trial) {
    auto net = random_net({3, 3, 3, 1}, 300 + trial);
    const auto x = random_input(3, rng);
    const auto dir = random_input(3, rng);

    Mlp::Cache cache;
    net.forward_scalar(x, &cache);
    Mlp::TangentCache tangent;
    net.directional_derivative(cache, dir, &tangent);
    auto grads = net.make_grads();
    const double one = 1.0;
    net.add_directional_param_grads(cache, tangent,
                                    std::span<const double>(&one, 1), 1.0, grads);
    const auto analytic = flatten(grads);

    auto scalar = [&]() {
      Mlp::Cache c;
      net.forward_scalar(x, &c);
      return net.directional_derivative(c, dir)[0];
    };
    std::vector<double> numeric;
    for (double* p : parameter_pointers(net)) {
      const double saved = *p;
      *p = saved + step;
      const double plus = scalar();
      *p = saved - step;
      const double minus = scalar();
      *p = saved;
      numeric.push_back((plus - minus) / (2.0 * step));
    }
    const double scale = std::max(test_support::max_abs(numeric), 1e-3);
    CHECK(test_support::max_abs_diff(analytic, numeric) / scale <= 1e-5);
  }
}

TEST_CASE("adam leaves parameters unchanged under zero gradients") {
  auto net = random_net({2, 2, 2, 1}, 55);
  const auto before = net.layers();
  nn::Adam adam(net);
  adam.step(net, net.make_grads());
  for (std::size_t l = 0; l < before.size(); ++l) {
    CHECK(net.layers()[l].w == before[l].w);
    CHECK(net.layers()[l].b == before[l].b);
  }
}

TEST_CASE("adam first step moves by the learning rate under unit gradients") {
  auto net = random_net({2, 2, 2, 1}, 56);
  const auto before = net.layers();
  nn::Adam adam(net);
  CHECK(adam.config().learning_rate == doctest::Approx(1e-3));
  auto grads = net.make_grads();
  for (auto& layer : grads.layers) {
    std::fill(layer.w.begin(), layer.w.end(), 1.0);
    std::fill(layer.b.begin(), layer.b.end(), 1.0);
  }
  adam.step(net, grads);
  // Bias-corrected m-hat = v-hat = 1 on step one: update = -lr / (1 + eps).
  for (std::size_t l = 0; l < before.size(); ++l) {
    for (std::size_t i = 0; i < before[l].w.size(); ++i) {
      const double delta = net.layers()[l].w[i] - before[l].w[i];
      CHECK(std::abs(delta + 1e-3) <= 1e-10);
    }
  }
}

TEST_CASE("adam rejects non-finite gradients") {
  auto net = random_net({2, 2, 2, 1}, 57);
  nn::Adam adam(net);
  auto grads = net.make_grads();
  grads.layers[0].w[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(adam.step(net, grads), std::runtime_error);
}

TEST_CASE("mlp JSON weights round-trip exactly") {
  const auto net = random_net({3, 3, 3, 2}, 8128);
  const auto text = nn::mlp_to_json(net);
  const auto loaded = nn::mlp_from_json(text);
  REQUIRE(loaded.layers().size() == net.layers().size());
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    CHECK(loaded.layers()[l].w == net.layers()[l].w);
    CHECK(loaded.layers()[l].b == net.layers()[l].b);
  }
}
