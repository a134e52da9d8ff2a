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

#include "ctpomdp/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ctpomdp {

namespace {
constexpr double kRowSumTol = 1e-12;
}  // namespace

Belief Belief::uniform(int n) {
  Belief b(n);
  std::fill(b.p.begin(), b.p.end(), 1.0 / static_cast<double>(n));
  return b;
}

Belief Belief::point_mass(int n, int x) {
  Belief b(n);
  b.p[static_cast<std::size_t>(x)] = 1.0;
  return b;
}

void Belief::clip_and_normalize() {
  double total = 0.0;
  for (auto& v : p) {
    if (v < 0.0) v = 0.0;
    total += v;
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw std::runtime_error("Belief::clip_and_normalize: mass not positive");
  }
  for (auto& v : p) v /= total;
}

bool Belief::on_simplex(double tol) const {
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) return false;
    total += v;
  }
  return std::abs(total - 1.0) <= tol;
}

PomdpModel::PomdpModel(int num_states_, int num_actions_, int num_observations_)
    : num_states(num_states_),
      num_actions(num_actions_),
      num_observations(num_observations_) {
  const auto s = static_cast<std::size_t>(num_states);
  const auto u = static_cast<std::size_t>(num_actions);
  const auto y = static_cast<std::size_t>(num_observations);
  rates.assign(u * s * s, 0.0);
  obs_likelihood.assign(u * s * y, 0.0);
  obs_rate.assign(u, 0.0);
  reward_rate.assign(u * s, 0.0);
}

std::span<const double> PomdpModel::rate_row(int u, int x) const {
  return std::span<const double>(rates)
      .subspan(idx3(u, x, 0, num_states, num_states),
               static_cast<std::size_t>(num_states));
}

std::span<const double> PomdpModel::likelihood_row(int u, int x) const {
  return std::span<const double>(obs_likelihood)
      .subspan(idx3(u, x, 0, num_states, num_observations),
               static_cast<std::size_t>(num_observations));
}

double PomdpModel::exit_rate(int x, int u) const {
  check_state(x);
  check_action(u);
  double total = 0.0;
  auto row = rate_row(u, x);
  for (int to = 0; to < num_states; ++to) {
    if (to != x) total += row[static_cast<std::size_t>(to)];
  }
  return total;
}

double PomdpModel::max_exit_rate(int x) const {
  double best = 0.0;
  for (int u = 0; u < num_actions; ++u) best = std::max(best, exit_rate(x, u));
  return best;
}

double PomdpModel::max_obs_rate() const {
  double best = 0.0;
  for (double r : obs_rate) best = std::max(best, r);
  return best;
}

std::vector<double> PomdpModel::jump_distribution(int x, int u) const {
  const double total = exit_rate(x, u);
  if (!(total > 0.0)) {
    throw std::domain_error("jump_distribution: zero exit rate, no jump law");
  }
  std::vector<double> dist(static_cast<std::size_t>(num_states), 0.0);
  auto row = rate_row(u, x);
  for (int to = 0; to < num_states; ++to) {
    if (to != x) dist[static_cast<std::size_t>(to)] =
        row[static_cast<std::size_t>(to)] / total;
  }
  return dist;
}

double PomdpModel::expected_reward(const Belief& belief, int u) const {
  check_action(u);
  if (belief.size() != num_states) {
    throw std::invalid_argument("expected_reward: belief dimension mismatch");
  }
  double total = 0.0;
  for (int x = 0; x < num_states; ++x) total += reward(u, x) * belief[x];
  return total;
}

bool PomdpModel::obs_likelihood_action_independent() const {
  const std::size_t block =
      static_cast<std::size_t>(num_states) *
      static_cast<std::size_t>(num_observations);
  for (int u = 1; u < num_actions; ++u) {
    for (std::size_t i = 0; i < block; ++i) {
      if (obs_likelihood[static_cast<std::size_t>(u) * block + i] !=
          obs_likelihood[i]) {
        return false;
      }
    }
  }
  return true;
}

std::vector<std::string> PomdpModel::validate() const {
  std::vector<std::string> violations;
  auto report = [&](const std::string& msg) { violations.push_back(msg); };

  if (num_states <= 0) report("num_states must be positive");
  if (num_actions <= 0) report("num_actions must be positive");
  if (num_observations <= 0) report("num_observations must be positive");
  if (!violations.empty()) return violations;

  const auto s = static_cast<std::size_t>(num_states);
  const auto a = static_cast<std::size_t>(num_actions);
  const auto y = static_cast<std::size_t>(num_observations);
  if (rates.size() != a * s * s) report("rates table has wrong shape");
  if (obs_likelihood.size() != a * s * y)
    report("obs_likelihood table has wrong shape");
  if (obs_rate.size() != a) report("obs_rate table has wrong shape");
  if (reward_rate.size() != a * s) report("reward_rate table has wrong shape");
  if (!violations.empty()) return violations;

  for (int u = 0; u < num_actions; ++u) {
    for (int x = 0; x < num_states; ++x) {
      double row_sum = 0.0;
      for (int to = 0; to < num_states; ++to) {
        const double r = rate(u, x, to);
        if (!std::isfinite(r)) {
          std::ostringstream os;
          os << "non-finite rate at u=" << u << " x=" << x << " x'=" << to;
          report(os.str());
        }
        if (to != x && r < 0.0) {
          std::ostringstream os;
          os << "negative off-diagonal rate at u=" << u << " x=" << x
             << " x'=" << to;
          report(os.str());
        }
        row_sum += r;
      }
      if (std::abs(row_sum) > kRowSumTol) {
        std::ostringstream os;
        os << "generator row does not sum to zero at u=" << u << " x=" << x
           << " (sum=" << row_sum << ")";
        report(os.str());
      }
      double like_sum = 0.0;
      for (int yy = 0; yy < num_observations; ++yy) {
        const double l = likelihood(u, x, yy);
        if (l < 0.0 || !std::isfinite(l)) {
          std::ostringstream os;
          os << "invalid likelihood entry at u=" << u << " x=" << x
             << " y=" << yy;
          report(os.str());
        }
        like_sum += l;
      }
      if (std::abs(like_sum - 1.0) > kRowSumTol) {
        std::ostringstream os;
        os << "likelihood row not normalized at u=" << u << " x=" << x
           << " (sum=" << like_sum << ")";
        report(os.str());
      }
    }
    if (obs_rate[static_cast<std::size_t>(u)] < 0.0) {
      std::ostringstream os;
      os << "negative observation rate at u=" << u;
      report(os.str());
    }
  }
  if (!(discount > 0.0)) report("discount must be positive");
  return violations;
}

void PomdpModel::require_valid() const {
  auto violations = validate();
  if (violations.empty()) return;
  std::ostringstream os;
  os << "invalid model:";
  for (const auto& v : violations) os << " [" << v << "]";
  throw std::invalid_argument(os.str());
}

void PomdpModel::check_state(int x) const {
  if (x < 0 || x >= num_states)
    throw std::out_of_range("state index out of range");
}
void PomdpModel::check_action(int u) const {
  if (u < 0 || u >= num_actions)
    throw std::out_of_range("action index out of range");
}
void PomdpModel::check_observation(int y) const {
  if (y < 0 || y >= num_observations)
    throw std::out_of_range("observation index out of range");
}

namespace {

using nlohmann::json;

json table3_to_json(const std::vector<double>& flat, int d0, int d1, int d2) {
  json out = json::array();
  std::size_t k = 0;
  for (int a = 0; a < d0; ++a) {
    json mid = json::array();
    for (int b = 0; b < d1; ++b) {
      json row = json::array();
      for (int c = 0; c < d2; ++c) row.push_back(flat[k++]);
      mid.push_back(std::move(row));
    }
    out.push_back(std::move(mid));
  }
  return out;
}

json table2_to_json(const std::vector<double>& flat, int d0, int d1) {
  json out = json::array();
  std::size_t k = 0;
  for (int a = 0; a < d0; ++a) {
    json row = json::array();
    for (int b = 0; b < d1; ++b) row.push_back(flat[k++]);
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

std::string model_to_json(const PomdpModel& m) {
  json j;
  j["num_states"] = m.num_states;
  j["num_actions"] = m.num_actions;
  j["num_observations"] = m.num_observations;
  j["rates"] = table3_to_json(m.rates, m.num_actions, m.num_states, m.num_states);
  j["obs_likelihood"] = table3_to_json(m.obs_likelihood, m.num_actions,
                                       m.num_states, m.num_observations);
  j["obs_rate"] = m.obs_rate;
  j["reward_rate"] = table2_to_json(m.reward_rate, m.num_actions, m.num_states);
  j["discount"] = m.discount;
  if (!m.labels.states.empty() || !m.labels.actions.empty() ||
      !m.labels.observations.empty()) {
    j["labels"] = {{"states", m.labels.states},
                   {"actions", m.labels.actions},
                   {"observations", m.labels.observations}};
  }
  return j.dump(2);
}

PomdpModel model_from_json(const std::string& text) {
  json j = json::parse(text);
  if (!j.contains("num_states") || !j.contains("rates") ||
      !j.contains("obs_likelihood") || !j.contains("obs_rate") ||
      !j.contains("reward_rate") || !j.contains("discount")) {
    throw std::invalid_argument(
        "model JSON must contain num_states, rates, obs_likelihood, obs_rate, "
        "reward_rate and discount");
  }
  const int num_states = j.at("num_states").get<int>();
  const auto& rates = j.at("rates");
  const int num_actions = static_cast<int>(rates.size());
  if (num_actions <= 0) throw std::invalid_argument("rates table is empty");
  const auto& like = j.at("obs_likelihood");
  if (static_cast<int>(like.size()) != num_actions) {
    throw std::invalid_argument("obs_likelihood action count mismatch");
  }
  if (like.at(0).empty()) {
    throw std::invalid_argument("obs_likelihood rows are empty");
  }
  const int num_observations = static_cast<int>(like.at(0).at(0).size());

  if (j.contains("num_actions") && j.at("num_actions").get<int>() != num_actions)
    throw std::invalid_argument("num_actions inconsistent with rates shape");
  if (j.contains("num_observations") &&
      j.at("num_observations").get<int>() != num_observations)
    throw std::invalid_argument(
        "num_observations inconsistent with obs_likelihood shape");

  PomdpModel m(num_states, num_actions, num_observations);
  for (int u = 0; u < num_actions; ++u) {
    const auto& mat = rates.at(static_cast<std::size_t>(u));
    if (static_cast<int>(mat.size()) != num_states)
      throw std::invalid_argument("rates row count mismatch");
    for (int x = 0; x < num_states; ++x) {
      const auto& row = mat.at(static_cast<std::size_t>(x));
      if (static_cast<int>(row.size()) != num_states)
        throw std::invalid_argument("rates column count mismatch");
      for (int to = 0; to < num_states; ++to)
        m.rate(u, x, to) = row.at(static_cast<std::size_t>(to)).get<double>();
    }
    const auto& lmat = like.at(static_cast<std::size_t>(u));
    if (static_cast<int>(lmat.size()) != num_states)
      throw std::invalid_argument("obs_likelihood row count mismatch");
    for (int x = 0; x < num_states; ++x) {
      const auto& row = lmat.at(static_cast<std::size_t>(x));
      if (static_cast<int>(row.size()) != num_observations)
        throw std::invalid_argument("obs_likelihood column count mismatch");
      for (int y = 0; y < num_observations; ++y)
        m.likelihood(u, x, y) = row.at(static_cast<std::size_t>(y)).get<double>();
    }
  }
  m.obs_rate = j.at("obs_rate").get<std::vector<double>>();
  if (static_cast<int>(m.obs_rate.size()) != num_actions)
    throw std::invalid_argument("obs_rate length mismatch");
  const auto& rew = j.at("reward_rate");
  if (static_cast<int>(rew.size()) != num_actions)
    throw std::invalid_argument("reward_rate row count mismatch");
  for (int u = 0; u < num_actions; ++u) {
    const auto& row = rew.at(static_cast<std::size_t>(u));
    if (static_cast<int>(row.size()) != num_states)
      throw std::invalid_argument("reward_rate column count mismatch");
    for (int x = 0; x < num_states; ++x)
      m.reward(u, x) = row.at(static_cast<std::size_t>(x)).get<double>();
  }
  m.discount = j.at("discount").get<double>();
  if (j.contains("labels")) {
    const auto& lab = j.at("labels");
    if (lab.contains("states"))
      m.labels.states = lab.at("states").get<std::vector<std::string>>();
    if (lab.contains("actions"))
      m.labels.actions = lab.at("actions").get<std::vector<std::string>>();
    if (lab.contains("observations"))
      m.labels.observations =
          lab.at("observations").get<std::vector<std::string>>();
  }
  return m;
}

}  // namespace ctpomdp
