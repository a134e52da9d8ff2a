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

#ifndef CTPOMDP_NN_HPP_
#define CTPOMDP_NN_HPP_

#include <span>
#include <string>
#include <vector>

#include "ctpomdp/rng.hpp"

namespace ctpomdp::nn {

/// Gradients (or moment accumulators) shaped like the parameters of an Mlp.
struct Grads {
  struct Layer {
    std::vector<double> w;  // row-major, out x in
    std::vector<double> b;
  };
  std::vector<Layer> layers;

  void set_zero();
  void add_scaled(const Grads& other, double factor);
  void scale(double factor);
  bool all_finite() const;
};

/// Fully connected feedforward network with logistic-sigmoid hidden layers
/// and an affine output layer. The task networks use two hidden layers of
/// input width: value nets map the belief to a scalar, advantage nets to one
/// output per action.
///
/// Besides the forward pass and parameter backprop, the network exposes the
/// exact gradient and Hessian with respect to its *input* via first- and
/// second-order message passing, and the parameter gradient of directional
/// input derivatives (needed to train losses containing dV/dx terms).
class Mlp {
 public:
  struct Layer {
    int in = 0;
    int out = 0;
    std::vector<double> w;  // row-major, out x in
    std::vector<double> b;
  };

  Mlp() = default;
  /// sizes = {input, hidden..., output}; at least one hidden layer.
  explicit Mlp(const std::vector<int>& sizes);

  static Mlp value_net(int in_dim) { return Mlp({in_dim, in_dim, in_dim, 1}); }
  static Mlp advantage_net(int in_dim, int num_actions) {
    return Mlp({in_dim, in_dim, in_dim, num_actions});
  }

  int in_dim() const { return layers_.empty() ? 0 : layers_.front().in; }
  int out_dim() const { return layers_.empty() ? 0 : layers_.back().out; }
  int num_hidden() const { return static_cast<int>(layers_.size()) - 1; }

  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  /// Glorot-uniform weights, zero biases.
  void init_params(Rng& rng);

  /// Activations cached by a forward pass, reused by every derivative
  /// computation on the same input.
  struct Cache {
    std::vector<double> input;
    std::vector<std::vector<double>> pre;  // a^h per hidden layer
    std::vector<std::vector<double>> act;  // z^h per hidden layer
    std::vector<double> output;
  };

  std::vector<double> forward(std::span<const double> x, Cache* cache = nullptr) const;
  double forward_scalar(std::span<const double> x, Cache* cache = nullptr) const;

  /// First-order input-derivative messages per hidden layer:
  /// s^h = pre-activation Jacobian rows, m^h = sigma'(a^h) * s^h.
  struct GradientMessages {
    std::vector<std::vector<double>> s;  // hidden x in, row-major
    std::vector<std::vector<double>> m;
  };
  GradientMessages gradient_messages(const Cache& cache) const;

  /// d output / d input as a row-major out x in Jacobian.
  std::vector<double> input_jacobian(const Cache& cache,
                                     const GradientMessages& messages) const;

  /// d V / d x for scalar-output networks (size in).
  std::vector<double> input_gradient(const Cache& cache) const;
  std::vector<double> input_gradient(const Cache& cache,
                                     const GradientMessages& messages) const;

  /// d^2 V / d x^2 for scalar-output networks, row-major in x in. Symmetric
  /// by construction of the second-order messages.
  std::vector<double> input_hessian(const Cache& cache) const;
  std::vector<double> input_hessian(const Cache& cache,
                                    const GradientMessages& messages) const;

  /// Accumulates scale * d(cotangent . output)/d params into grads.
  void add_param_grads(const Cache& cache, std::span<const double> cotangent,
                       double scale, Grads& grads) const;

  /// Tangent-line activations of a forward directional pass.
  struct TangentCache {
    std::vector<double> dir;
    std::vector<std::vector<double>> pre_t;  // da^h per hidden layer
    std::vector<std::vector<double>> act_t;  // dz^h per hidden layer
    std::vector<double> out_t;               // J . dir
  };

  /// Directional input derivative J(x) . dir (size out). With a tangent
  /// cache the result can be backpropagated into parameter space.
  std::vector<double> directional_derivative(const Cache& cache,
                                             std::span<const double> dir,
                                             TangentCache* tangent = nullptr) const;

  /// Accumulates scale * d(cotangent . (J . dir))/d params into grads,
  /// reusing a tangent cache from directional_derivative.
  void add_directional_param_grads(const Cache& cache,
                                   const TangentCache& tangent,
                                   std::span<const double> cotangent,
                                   double scale, Grads& grads) const;

  Grads make_grads() const;
  std::size_t num_params() const;

 private:
  std::vector<Layer> layers_;
};

std::string mlp_to_json(const Mlp& net);
Mlp mlp_from_json(const std::string& text);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction. Throws on non-finite gradients.
class Adam {
 public:
  Adam() = default;
  explicit Adam(const Mlp& net, const AdamConfig& config = {});

  void step(Mlp& net, const Grads& grads);

  long step_count() const { return step_count_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  Grads first_moment_;
  Grads second_moment_;
  long step_count_ = 0;
};

}  // namespace ctpomdp::nn

#endif  // CTPOMDP_NN_HPP_
