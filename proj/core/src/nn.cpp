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

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace ctpomdp::nn {

namespace {

double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

// sigma' and sigma'' expressed through the cached activation z = sigma(a).
double sigmoid_d1(double z) { return z * (1.0 - z); }
double sigmoid_d2(double z) { return z * (1.0 - z) * (1.0 - 2.0 * z); }

}  // namespace

void Grads::set_zero() {
  for (auto& layer : layers) {
    std::fill(layer.w.begin(), layer.w.end(), 0.0);
    std::fill(layer.b.begin(), layer.b.end(), 0.0);
  }
}

void Grads::add_scaled(const Grads& other, double factor) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (std::size_t i = 0; i < layers[l].w.size(); ++i)
      layers[l].w[i] += factor * other.layers[l].w[i];
    for (std::size_t i = 0; i < layers[l].b.size(); ++i)
      layers[l].b[i] += factor * other.layers[l].b[i];
  }
}

void Grads::scale(double factor) {
  for (auto& layer : layers) {
    for (auto& v : layer.w) v *= factor;
    for (auto& v : layer.b) v *= factor;
  }
}

bool Grads::all_finite() const {
  for (const auto& layer : layers) {
    for (double v : layer.w)
      if (!std::isfinite(v)) return false;
    for (double v : layer.b)
      if (!std::isfinite(v)) return false;
  }
  return true;
}

Mlp::Mlp(const std::vector<int>& sizes) {
  if (sizes.size() < 3)
    throw std::invalid_argument("Mlp: need at least one hidden layer");
  for (int s : sizes)
    if (s <= 0) throw std::invalid_argument("Mlp: layer sizes must be positive");
  layers_.resize(sizes.size() - 1);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    layers_[l].in = sizes[l];
    layers_[l].out = sizes[l + 1];
    layers_[l].w.assign(static_cast<std::size_t>(sizes[l]) *
                            static_cast<std::size_t>(sizes[l + 1]),
                        0.0);
    layers_[l].b.assign(static_cast<std::size_t>(sizes[l + 1]), 0.0);
  }
}

void Mlp::init_params(Rng& rng) {
  for (auto& layer : layers_) {
    const double bound = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
    for (auto& w : layer.w) w = rng.uniform(-bound, bound);
    std::fill(layer.b.begin(), layer.b.end(), 0.0);
  }
}

std::vector<double> Mlp::forward(std::span<const double> x, Cache* cache) const {
  if (static_cast<int>(x.size()) != in_dim())
    throw std::invalid_argument("Mlp::forward: input dimension mismatch");
  if (cache) {
    cache->input.assign(x.begin(), x.end());
    cache->pre.assign(static_cast<std::size_t>(num_hidden()), {});
    cache->act.assign(static_cast<std::size_t>(num_hidden()), {});
  }
  std::vector<double> current(x.begin(), x.end());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    std::vector<double> a(static_cast<std::size_t>(layer.out));
    for (int k = 0; k < layer.out; ++k) {
      double acc = layer.b[static_cast<std::size_t>(k)];
      const double* row = &layer.w[static_cast<std::size_t>(k) *
                                   static_cast<std::size_t>(layer.in)];
      for (int i = 0; i < layer.in; ++i)
        acc += row[i] * current[static_cast<std::size_t>(i)];
      a[static_cast<std::size_t>(k)] = acc;
    }
    if (l + 1 < layers_.size()) {
      std::vector<double> z(static_cast<std::size_t>(layer.out));
      for (int k = 0; k < layer.out; ++k)
        z[static_cast<std::size_t>(k)] = sigmoid(a[static_cast<std::size_t>(k)]);
      if (cache) {
        cache->pre[l] = std::move(a);
        cache->act[l] = z;
      }
      current = std::move(z);
    } else {
      if (cache) cache->output = a;
      current = std::move(a);
    }
  }
  return current;
}

double Mlp::forward_scalar(std::span<const double> x, Cache* cache) const {
  if (out_dim() != 1)
    throw std::logic_error("Mlp::forward_scalar: network output is not scalar");
  return forward(x, cache)[0];
}

Mlp::GradientMessages Mlp::gradient_messages(const Cache& cache) const {
  const int n_in = in_dim();
  const int hidden_count = num_hidden();
  GradientMessages msg;
  msg.s.resize(static_cast<std::size_t>(hidden_count));
  msg.m.resize(static_cast<std::size_t>(hidden_count));

  for (int h = 0; h < hidden_count; ++h) {
    const auto& layer = layers_[static_cast<std::size_t>(h)];
    auto& s = msg.s[static_cast<std::size_t>(h)];
    auto& m = msg.m[static_cast<std::size_t>(h)];
    s.assign(static_cast<std::size_t>(layer.out) * static_cast<std::size_t>(n_in),
             0.0);
    m.assign(s.size(), 0.0);
    const auto& z = cache.act[static_cast<std::size_t>(h)];
    if (h == 0) {
      // s^0 is the first weight matrix itself.
      for (int k = 0; k < layer.out; ++k) {
        const double d1 = sigmoid_d1(z[static_cast<std::size_t>(k)]);
        for (int i = 0; i < n_in; ++i) {
          const double w = layer.w[static_cast<std::size_t>(k) *
                                       static_cast<std::size_t>(layer.in) +
                                   static_cast<std::size_t>(i)];
          s[static_cast<std::size_t>(k) * static_cast<std::size_t>(n_in) +
            static_cast<std::size_t>(i)] = w;
          m[static_cast<std::size_t>(k) * static_cast<std::size_t>(n_in) +
            static_cast<std::size_t>(i)] = d1 * w;
        }
      }
    } else {
      const auto& m_prev = msg.m[static_cast<std::size_t>(h - 1)];
      for (int k = 0; k < layer.out; ++k) {
        const double d1 = sigmoid_d1(z[static_cast<std::size_t>(k)]);
        double* s_row = &s[static_cast<std::size_t>(k) *
                           static_cast<std::size_t>(n_in)];
        const double* w_row = &layer.w[static_cast<std::size_t>(k) *
                                       static_cast<std::size_t>(layer.in)];
        for (int n = 0; n < layer.in; ++n) {
          const double w = w_row[n];
          if (w == 0.0) continue;
          const double* mp_row = &m_prev[static_cast<std::size_t>(n) *
                                         static_cast<std::size_t>(n_in)];
          for (int i = 0; i < n_in; ++i) s_row[i] += w * mp_row[i];
        }
        double* m_row = &m[static_cast<std::size_t>(k) *
                           static_cast<std::size_t>(n_in)];
        for (int i = 0; i < n_in; ++i) m_row[i] = d1 * s_row[i];
      }
    }
  }
  return msg;
}

std::vector<double> Mlp::input_jacobian(const Cache&,
                                        const GradientMessages& messages) const {
  const int n_in = in_dim();
  const auto& out_layer = layers_.back();
  const auto& m_last = messages.m.back();
  std::vector<double> jac(static_cast<std::size_t>(out_layer.out) *
                              static_cast<std::size_t>(n_in),
                          0.0);
  for (int o = 0; o < out_layer.out; ++o) {
    double* jrow = &jac[static_cast<std::size_t>(o) * static_cast<std::size_t>(n_in)];
    const double* w_row = &out_layer.w[static_cast<std::size_t>(o) *
                                       static_cast<std::size_t>(out_layer.in)];
    for (int n = 0; n < out_layer.in; ++n) {
      const double w = w_row[n];
      if (w == 0.0) continue;
      const double* m_row = &m_last[static_cast<std::size_t>(n) *
                                    static_cast<std::size_t>(n_in)];
      for (int i = 0; i < n_in; ++i) jrow[i] += w * m_row[i];
    }
  }
  return jac;
}

std::vector<double> Mlp::input_gradient(const Cache& cache) const {
  return input_gradient(cache, gradient_messages(cache));
}

std::vector<double> Mlp::input_gradient(const Cache& cache,
                                        const GradientMessages& messages) const {
  if (out_dim() != 1)
    throw std::logic_error("Mlp::input_gradient: network output is not scalar");
  return input_jacobian(cache, messages);
}

std::vector<double> Mlp::input_hessian(const Cache& cache) const {
  return input_hessian(cache, gradient_messages(cache));
}

std::vector<double> Mlp::input_hessian(const Cache& cache,
                                       const GradientMessages& messages) const {
  if (out_dim() != 1)
    throw std::logic_error("Mlp::input_hessian: network output is not scalar");
  const int n_in = in_dim();
  const std::size_t plane = static_cast<std::size_t>(n_in) *
                            static_cast<std::size_t>(n_in);
  const int hidden_count = num_hidden();

  // Second-order messages per hidden layer, one in x in plane per unit.
  std::vector<double> tilde_prev, tilde;
  for (int h = 0; h < hidden_count; ++h) {
    const auto& layer = layers_[static_cast<std::size_t>(h)];
    const auto& z = cache.act[static_cast<std::size_t>(h)];
    const auto& s = messages.s[static_cast<std::size_t>(h)];
    tilde.assign(static_cast<std::size_t>(layer.out) * plane, 0.0);
    for (int k = 0; k < layer.out; ++k) {
      const double d1 = sigmoid_d1(z[static_cast<std::size_t>(k)]);
      const double d2 = sigmoid_d2(z[static_cast<std::size_t>(k)]);
      const double* s_row = &s[static_cast<std::size_t>(k) *
                               static_cast<std::size_t>(n_in)];
      double* t_plane = &tilde[static_cast<std::size_t>(k) * plane];
      // Rank-one curvature term sigma'' s_i s_j.
      for (int i = 0; i < n_in; ++i) {
        const double si = s_row[i];
        if (si == 0.0 && d2 == 0.0) continue;
        for (int j = 0; j < n_in; ++j)
          t_plane[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_in) +
                  static_cast<std::size_t>(j)] = d2 * si * s_row[j];
      }
      // Propagated curvature sigma' sum_n w_kn tilde^{h-1}_n.
      if (h > 0) {
        const double* w_row = &layer.w[static_cast<std::size_t>(k) *
                                       static_cast<std::size_t>(layer.in)];
        for (int n = 0; n < layer.in; ++n) {
          const double w = d1 * w_row[n];
          if (w == 0.0) continue;
          const double* tp = &tilde_prev[static_cast<std::size_t>(n) * plane];
          for (std::size_t e = 0; e < plane; ++e) t_plane[e] += w * tp[e];
        }
      }
    }
    tilde_prev.swap(tilde);
  }

  const auto& out_layer = layers_.back();
  std::vector<double> hess(plane, 0.0);
  for (int n = 0; n < out_layer.in; ++n) {
    const double w = out_layer.w[static_cast<std::size_t>(n)];
    if (w == 0.0) continue;
    const double* tp = &tilde_prev[static_cast<std::size_t>(n) * plane];
    for (std::size_t e = 0; e < plane; ++e) hess[e] += w * tp[e];
  }
  return hess;
}

void Mlp::add_param_grads(const Cache& cache, std::span<const double> cotangent,
                          double scale, Grads& grads) const {
  if (static_cast<int>(cotangent.size()) != out_dim())
    throw std::invalid_argument("add_param_grads: cotangent dimension mismatch");
  const int hidden_count = num_hidden();

  // Output layer.
  {
    const auto& layer = layers_.back();
    auto& g = grads.layers.back();
    const auto& z_prev =
        hidden_count > 0 ? cache.act.back() : cache.input;
    for (int k = 0; k < layer.out; ++k) {
      const double delta = scale * cotangent[static_cast<std::size_t>(k)];
      if (delta == 0.0) continue;
      g.b[static_cast<std::size_t>(k)] += delta;
      double* g_row = &g.w[static_cast<std::size_t>(k) *
                           static_cast<std::size_t>(layer.in)];
      for (int i = 0; i < layer.in; ++i)
        g_row[i] += delta * z_prev[static_cast<std::size_t>(i)];
    }
  }

  // chi = d(cot . out) / d z^h, walked backwards through the hidden stack.
  std::vector<double> chi(static_cast<std::size_t>(layers_.back().in), 0.0);
  {
    const auto& layer = layers_.back();
    for (int k = 0; k < layer.out; ++k) {
      const double c = cotangent[static_cast<std::size_t>(k)];
      if (c == 0.0) continue;
      const double* w_row = &layer.w[static_cast<std::size_t>(k) *
                                     static_cast<std::size_t>(layer.in)];
      for (int i = 0; i < layer.in; ++i) chi[static_cast<std::size_t>(i)] += c * w_row[i];
    }
  }

  for (int h = hidden_count - 1; h >= 0; --h) {
    const auto& layer = layers_[static_cast<std::size_t>(h)];
    auto& g = grads.layers[static_cast<std::size_t>(h)];
    const auto& z = cache.act[static_cast<std::size_t>(h)];
    const auto& z_prev = h > 0 ? cache.act[static_cast<std::size_t>(h - 1)]
                               : cache.input;
    std::vector<double> chi_prev(static_cast<std::size_t>(layer.in), 0.0);
    for (int k = 0; k < layer.out; ++k) {
      const double delta =
          sigmoid_d1(z[static_cast<std::size_t>(k)]) * chi[static_cast<std::size_t>(k)];
      if (delta == 0.0) continue;
      g.b[static_cast<std::size_t>(k)] += scale * delta;
      double* g_row = &g.w[static_cast<std::size_t>(k) *
                           static_cast<std::size_t>(layer.in)];
      const double* w_row = &layer.w[static_cast<std::size_t>(k) *
                                     static_cast<std::size_t>(layer.in)];
      for (int i = 0; i < layer.in; ++i) {
        g_row[i] += scale * delta * z_prev[static_cast<std::size_t>(i)];
        chi_prev[static_cast<std::size_t>(i)] += delta * w_row[i];
      }
    }
    chi.swap(chi_prev);
  }
}

std::vector<double> Mlp::directional_derivative(const Cache& cache,
                                                std::span<const double> dir,
                                                TangentCache* tangent) const {
  if (static_cast<int>(dir.size()) != in_dim())
    throw std::invalid_argument("directional_derivative: direction mismatch");
  const int hidden_count = num_hidden();
  if (tangent) {
    tangent->dir.assign(dir.begin(), dir.end());
    tangent->pre_t.assign(static_cast<std::size_t>(hidden_count), {});
    tangent->act_t.assign(static_cast<std::size_t>(hidden_count), {});
  }
  std::vector<double> current(dir.begin(), dir.end());
  for (int h = 0; h < hidden_count; ++h) {
    const auto& layer = layers_[static_cast<std::size_t>(h)];
    const auto& z = cache.act[static_cast<std::size_t>(h)];
    std::vector<double> a_t(static_cast<std::size_t>(layer.out), 0.0);
    for (int k = 0; k < layer.out; ++k) {
      const double* w_row = &layer.w[static_cast<std::size_t>(k) *
                                     static_cast<std::size_t>(layer.in)];
      double acc = 0.0;
      for (int i = 0; i < layer.in; ++i)
        acc += w_row[i] * current[static_cast<std::size_t>(i)];
      a_t[static_cast<std::size_t>(k)] = acc;
    }
    std::vector<double> z_t(static_cast<std::size_t>(layer.out));
    for (int k = 0; k < layer.out; ++k)
      z_t[static_cast<std::size_t>(k)] =
          sigmoid_d1(z[static_cast<std::size_t>(k)]) * a_t[static_cast<std::size_t>(k)];
    if (tangent) {
      tangent->pre_t[static_cast<std::size_t>(h)] = std::move(a_t);
      tangent->act_t[static_cast<std::size_t>(h)] = z_t;
    }
    current = std::move(z_t);
  }
  const auto& out_layer = layers_.back();
  std::vector<double> out_t(static_cast<std::size_t>(out_layer.out), 0.0);
  for (int k = 0; k < out_layer.out; ++k) {
    const double* w_row = &out_layer.w[static_cast<std::size_t>(k) *
                                       static_cast<std::size_t>(out_layer.in)];
    double acc = 0.0;
    for (int i = 0; i < out_layer.in; ++i)
      acc += w_row[i] * current[static_cast<std::size_t>(i)];
    out_t[static_cast<std::size_t>(k)] = acc;
  }
  if (tangent) tangent->out_t = out_t;
  return out_t;
}

void Mlp::add_directional_param_grads(const Cache& cache,
                                      const TangentCache& tangent,
                                      std::span<const double> cotangent,
                                      double scale, Grads& grads) const {
  if (static_cast<int>(cotangent.size()) != out_dim())
    throw std::invalid_argument(
        "add_directional_param_grads: cotangent dimension mismatch");
  const int hidden_count = num_hidden();

  // Output layer: s = W^H z_t^{H-1}; no dependence through the bias.
  {
    const auto& layer = layers_.back();
    auto& g = grads.layers.back();
    const auto& zt_prev =
        hidden_count > 0 ? tangent.act_t.back() : tangent.dir;
    for (int k = 0; k < layer.out; ++k) {
      const double c = scale * cotangent[static_cast<std::size_t>(k)];
      if (c == 0.0) continue;
      double* g_row = &g.w[static_cast<std::size_t>(k) *
                           static_cast<std::size_t>(layer.in)];
      for (int i = 0; i < layer.in; ++i)
        g_row[i] += c * zt_prev[static_cast<std::size_t>(i)];
    }
  }

  // Reverse pass over the doubled (primal, tangent) computation graph.
  std::vector<double> chi(static_cast<std::size_t>(layers_.back().in), 0.0);
  std::vector<double> chi_t(chi.size(), 0.0);
  {
    const auto& layer = layers_.back();
    for (int k = 0; k < layer.out; ++k) {
      const double c = cotangent[static_cast<std::size_t>(k)];
      if (c == 0.0) continue;
      const double* w_row = &layer.w[static_cast<std::size_t>(k) *
                                     static_cast<std::size_t>(layer.in)];
      for (int i = 0; i < layer.in; ++i)
        chi_t[static_cast<std::size_t>(i)] += c * w_row[i];
    }
  }

  for (int h = hidden_count - 1; h >= 0; --h) {
    const auto& layer = layers_[static_cast<std::size_t>(h)];
    auto& g = grads.layers[static_cast<std::size_t>(h)];
    const auto& z = cache.act[static_cast<std::size_t>(h)];
    const auto& a_t = tangent.pre_t[static_cast<std::size_t>(h)];
    const auto& z_prev = h > 0 ? cache.act[static_cast<std::size_t>(h - 1)]
                               : cache.input;
    const auto& zt_prev = h > 0 ? tangent.act_t[static_cast<std::size_t>(h - 1)]
                                : tangent.dir;
    std::vector<double> chi_prev(static_cast<std::size_t>(layer.in), 0.0);
    std::vector<double> chit_prev(static_cast<std::size_t>(layer.in), 0.0);
    for (int k = 0; k < layer.out; ++k) {
      const double zk = z[static_cast<std::size_t>(k)];
      // alpha = d(cot.s)/d a_k, alpha_t = d(cot.s)/d a_t_k.
      const double alpha =
          sigmoid_d1(zk) * chi[static_cast<std::size_t>(k)] +
          sigmoid_d2(zk) * a_t[static_cast<std::size_t>(k)] *
              chi_t[static_cast<std::size_t>(k)];
      const double alpha_t = sigmoid_d1(zk) * chi_t[static_cast<std::size_t>(k)];
      if (alpha == 0.0 && alpha_t == 0.0) continue;
      g.b[static_cast<std::size_t>(k)] += scale * alpha;
      double* g_row = &g.w[static_cast<std::size_t>(k) *
                           static_cast<std::size_t>(layer.in)];
      const double* w_row = &layer.w[static_cast<std::size_t>(k) *
                                     static_cast<std::size_t>(layer.in)];
      for (int i = 0; i < layer.in; ++i) {
        g_row[i] += scale * (alpha * z_prev[static_cast<std::size_t>(i)] +
                             alpha_t * zt_prev[static_cast<std::size_t>(i)]);
        chi_prev[static_cast<std::size_t>(i)] += alpha * w_row[i];
        chit_prev[static_cast<std::size_t>(i)] += alpha_t * w_row[i];
      }
    }
    chi.swap(chi_prev);
    chi_t.swap(chit_prev);
  }
}

Grads Mlp::make_grads() const {
  Grads g;
  g.layers.resize(layers_.size());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    g.layers[l].w.assign(layers_[l].w.size(), 0.0);
    g.layers[l].b.assign(layers_[l].b.size(), 0.0);
  }
  return g;
}

std::size_t Mlp::num_params() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += layer.w.size() + layer.b.size();
  return n;
}

std::string mlp_to_json(const Mlp& net) {
  nlohmann::json j;
  j["layers"] = nlohmann::json::array();
  for (const auto& layer : net.layers()) {
    nlohmann::json rows = nlohmann::json::array();
    for (int k = 0; k < layer.out; ++k) {
      nlohmann::json row = nlohmann::json::array();
      for (int i = 0; i < layer.in; ++i)
        row.push_back(layer.w[static_cast<std::size_t>(k) *
                                  static_cast<std::size_t>(layer.in) +
                              static_cast<std::size_t>(i)]);
      rows.push_back(std::move(row));
    }
    j["layers"].push_back({{"w", std::move(rows)}, {"b", layer.b}});
  }
  return j.dump();
}

Mlp mlp_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  const auto& jlayers = j.at("layers");
  if (jlayers.empty()) throw std::invalid_argument("mlp_from_json: no layers");
  std::vector<int> sizes;
  sizes.push_back(static_cast<int>(jlayers.at(0).at("w").at(0).size()));
  for (const auto& jl : jlayers)
    sizes.push_back(static_cast<int>(jl.at("w").size()));
  Mlp net(sizes);
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    auto& layer = net.layers()[l];
    const auto& jl = jlayers.at(l);
    const auto& rows = jl.at("w");
    if (static_cast<int>(rows.size()) != layer.out)
      throw std::invalid_argument("mlp_from_json: weight row count mismatch");
    for (int k = 0; k < layer.out; ++k) {
      const auto& row = rows.at(static_cast<std::size_t>(k));
      if (static_cast<int>(row.size()) != layer.in)
        throw std::invalid_argument("mlp_from_json: weight column mismatch");
      for (int i = 0; i < layer.in; ++i)
        layer.w[static_cast<std::size_t>(k) * static_cast<std::size_t>(layer.in) +
                static_cast<std::size_t>(i)] =
            row.at(static_cast<std::size_t>(i)).get<double>();
    }
    layer.b = jl.at("b").get<std::vector<double>>();
    if (static_cast<int>(layer.b.size()) != layer.out)
      throw std::invalid_argument("mlp_from_json: bias length mismatch");
  }
  return net;
}

Adam::Adam(const Mlp& net, const AdamConfig& config)
    : config_(config),
      first_moment_(net.make_grads()),
      second_moment_(net.make_grads()) {}

void Adam::step(Mlp& net, const Grads& grads) {
  if (!grads.all_finite())
    throw std::runtime_error("Adam::step: non-finite gradient");
  ++step_count_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_count_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_count_));
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    auto& layer = net.layers()[l];
    auto update = [&](std::vector<double>& params, std::vector<double>& m,
                      std::vector<double>& v, const std::vector<double>& g) {
      for (std::size_t i = 0; i < params.size(); ++i) {
        m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i];
        v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g[i] * g[i];
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        params[i] -= config_.learning_rate * m_hat /
                     (std::sqrt(v_hat) + config_.epsilon);
      }
    };
    update(layer.w, first_moment_.layers[l].w, second_moment_.layers[l].w,
           grads.layers[l].w);
    update(layer.b, first_moment_.layers[l].b, second_moment_.layers[l].b,
           grads.layers[l].b);
  }
}

}  // namespace ctpomdp::nn
