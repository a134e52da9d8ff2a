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

#include "ctpomdp/envs.hpp"

#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace ctpomdp::envs {

namespace {

void close_generator_rows(PomdpModel& m) {
  for (int u = 0; u < m.num_actions; ++u) {
    for (int x = 0; x < m.num_states; ++x) {
      double off_sum = 0.0;
      for (int to = 0; to < m.num_states; ++to) {
        if (to != x) off_sum += m.rate(u, x, to);
      }
      m.rate(u, x, x) = -off_sum;
    }
  }
}

}  // namespace

PomdpModel build_tiger() {
  constexpr int kTigerLeft = 0;
  constexpr int kListen = 0, kOpenLeft = 1, kOpenRight = 2;
  constexpr int kHearLeft = 0, kHearRight = 1;
  constexpr double kHearAccuracy = 0.85;

  PomdpModel m(2, 3, 2);
  // The tiger never moves: all transition rates stay zero.

  for (int u = 0; u < m.num_actions; ++u) {
    for (int x = 0; x < m.num_states; ++x) {
      const bool tiger_left = (x == kTigerLeft);
      m.likelihood(u, x, kHearLeft) = tiger_left ? kHearAccuracy : 1.0 - kHearAccuracy;
      m.likelihood(u, x, kHearRight) = tiger_left ? 1.0 - kHearAccuracy : kHearAccuracy;
    }
  }
  // Observations only arrive while listening.
  m.obs_rate = {2.0, 0.0, 0.0};

  m.reward(kListen, 0) = -0.01;
  m.reward(kListen, 1) = -0.01;
  m.reward(kOpenLeft, kTigerLeft) = -1.0;
  m.reward(kOpenLeft, 1 - kTigerLeft) = 0.1;
  m.reward(kOpenRight, kTigerLeft) = 0.1;
  m.reward(kOpenRight, 1 - kTigerLeft) = -1.0;
  m.discount = 0.9;

  m.labels.states = {"tiger-left", "tiger-right"};
  m.labels.actions = {"listen", "open-left", "open-right"};
  m.labels.observations = {"hear-left", "hear-right"};
  return m;
}

std::array<double, 3> aloha_channel_probs(int n, double rho) {
  if (n < 1) throw std::invalid_argument("aloha_channel_probs: need n >= 1");
  if (!(rho > 0.0) || rho > 1.0)
    throw std::invalid_argument("aloha_channel_probs: need 0 < rho <= 1");
  const double p_idle = std::pow(1.0 - rho, n);
  const double p_transmission = rho * std::pow(1.0 - rho, n - 1);
  // The complement can round to a tiny negative (e.g. n = 1, rho = 1/3).
  const double p_collision = std::max(0.0, 1.0 - p_idle - p_transmission);
  return {p_idle, p_transmission, p_collision};
}

double aloha_optimal_rho(int n) {
  if (n < 1) throw std::invalid_argument("aloha_optimal_rho: need n >= 1");
  return 1.0 / static_cast<double>(n);
}

PomdpModel build_slotted_aloha(const AlohaConfig& cfg) {
  constexpr int kIdle = 0, kTransmission = 1, kCollision = 2;
  const int num_levels = cfg.max_packages + 1;
  const int num_states = num_levels * 3;
  const int num_actions = 9;

  PomdpModel m(num_states, num_actions, 3);
  auto state_of = [](int n, int c) { return n * 3 + c; };

  for (int u = 0; u < num_actions; ++u) {
    const double rho = 1.0 / static_cast<double>(u + 1);
    for (int n = 0; n < num_levels; ++n) {
      for (int c = 0; c < 3; ++c) {
        const int from = state_of(n, c);
        // Arrivals keep the channel memory unchanged.
        if (n < cfg.max_packages) {
          m.rate(u, from, state_of(n + 1, c)) += cfg.arrival_rate;
        }
        // Send events exist only with pending packages; the outcome
        // replaces the channel memory and a transmission hands one
        // package over. Outcomes reproducing the current state are
        // self-loops and carry no rate.
        if (n >= 1) {
          const auto probs = aloha_channel_probs(n, rho);
          const int targets[3] = {state_of(n, kIdle),
                                  state_of(n - 1, kTransmission),
                                  state_of(n, kCollision)};
          for (int outcome = 0; outcome < 3; ++outcome) {
            if (targets[outcome] != from) {
              m.rate(u, from, targets[outcome]) +=
                  cfg.send_rate * probs[static_cast<std::size_t>(outcome)];
            }
          }
        }
        // The channel memory is observed exactly.
        m.likelihood(u, from, c) = 1.0;
        if (cfg.indicator_reward) {
          m.reward(u, from) = c == kTransmission ? 1.0 : 0.0;
        } else {
          // Expected instantaneous throughput.
          m.reward(u, from) =
              n >= 1 ? cfg.send_rate * rho * std::pow(1.0 - rho, n - 1) : 0.0;
        }
      }
    }
    m.obs_rate[static_cast<std::size_t>(u)] = cfg.obs_rate;
  }
  close_generator_rows(m);
  m.discount = cfg.discount;

  const char* channel_names[3] = {"idle", "transmission", "collision"};
  for (int n = 0; n < num_levels; ++n) {
    for (int c = 0; c < 3; ++c) {
      std::ostringstream os;
      os << "n=" << n << "|" << channel_names[c];
      m.labels.states.push_back(os.str());
    }
  }
  for (int u = 0; u < num_actions; ++u) {
    std::ostringstream os;
    os << "rho=1/" << (u + 1);
    m.labels.actions.push_back(os.str());
  }
  m.labels.observations = {"idle", "transmission", "collision"};
  return m;
}

bool GridworldLayout::is_wall(int x, int y) const {
  for (const auto& [wx, wy] : walls) {
    if (wx == x && wy == y) return true;
  }
  return false;
}

PomdpModel build_gridworld(const GridworldLayout& layout) {
  if (layout.width <= 0 || layout.height <= 0)
    throw std::invalid_argument("gridworld: empty grid");
  if (!layout.in_bounds(layout.goal_x, layout.goal_y) ||
      layout.is_wall(layout.goal_x, layout.goal_y))
    throw std::invalid_argument("gridworld: goal must be a non-wall cell");

  const int num_states = layout.width * layout.height;
  constexpr int kNumActions = 4;
  // Direction deltas indexed by action: up, down, left, right.
  const int dx[kNumActions] = {0, 0, -1, 1};
  const int dy[kNumActions] = {1, -1, 0, 0};

  // Connectivity of the non-wall cells under the four moves.
  {
    std::vector<char> seen(static_cast<std::size_t>(num_states), 0);
    int first = -1, non_wall = 0;
    for (int y = 0; y < layout.height; ++y) {
      for (int x = 0; x < layout.width; ++x) {
        if (!layout.is_wall(x, y)) {
          ++non_wall;
          if (first < 0) first = layout.cell_index(x, y);
        }
      }
    }
    std::deque<int> queue = {first};
    seen[static_cast<std::size_t>(first)] = 1;
    int reached = 0;
    while (!queue.empty()) {
      const int cell = queue.front();
      queue.pop_front();
      ++reached;
      const int cx = cell % layout.width, cy = cell / layout.width;
      for (int d = 0; d < kNumActions; ++d) {
        const int nx = cx + dx[d], ny = cy + dy[d];
        if (!layout.in_bounds(nx, ny) || layout.is_wall(nx, ny)) continue;
        const int next = layout.cell_index(nx, ny);
        if (!seen[static_cast<std::size_t>(next)]) {
          seen[static_cast<std::size_t>(next)] = 1;
          queue.push_back(next);
        }
      }
    }
    if (reached != non_wall)
      throw std::invalid_argument("gridworld: layout is not connected");
  }

  PomdpModel m(num_states, kNumActions, num_states);

  for (int y = 0; y < layout.height; ++y) {
    for (int x = 0; x < layout.width; ++x) {
      const int from = layout.cell_index(x, y);
      if (layout.is_wall(x, y)) continue;  // wall states are inert
      for (int u = 0; u < kNumActions; ++u) {
        // Commanded direction with probability 0.7, slip 0.1 each to the
        // other three; invalid targets dropped and the rest renormalized.
        double probs[kNumActions];
        double total = 0.0;
        for (int d = 0; d < kNumActions; ++d) {
          const int nx = x + dx[d], ny = y + dy[d];
          const bool valid = layout.in_bounds(nx, ny) && !layout.is_wall(nx, ny);
          probs[d] = valid ? (d == u ? 1.0 - 3.0 * layout.slip_prob
                                     : layout.slip_prob)
                           : 0.0;
          total += probs[d];
        }
        if (total <= 0.0)
          throw std::invalid_argument("gridworld: isolated cell in layout");
        for (int d = 0; d < kNumActions; ++d) {
          if (probs[d] <= 0.0) continue;
          const int to = layout.cell_index(x + dx[d], y + dy[d]);
          m.rate(u, from, to) += layout.move_rate * probs[d] / total;
        }
        m.reward(u, from) =
            (x == layout.goal_x && y == layout.goal_y) ? layout.goal_reward_rate
                                                       : 0.0;
      }
    }
  }
  close_generator_rows(m);

  // Observation: a cell signal from a discretized Gaussian centered at the
  // true cell, supported on the non-wall cells.
  const double inv_two_sigma_sq = 1.0 / (2.0 * layout.obs_sigma * layout.obs_sigma);
  for (int y = 0; y < layout.height; ++y) {
    for (int x = 0; x < layout.width; ++x) {
      const int from = layout.cell_index(x, y);
      std::vector<double> weights(static_cast<std::size_t>(num_states), 0.0);
      double total = 0.0;
      for (int oy = 0; oy < layout.height; ++oy) {
        for (int ox = 0; ox < layout.width; ++ox) {
          if (layout.is_wall(ox, oy)) continue;
          const double d2 = static_cast<double>((ox - x) * (ox - x) +
                                                (oy - y) * (oy - y));
          const double w = std::exp(-d2 * inv_two_sigma_sq);
          weights[static_cast<std::size_t>(layout.cell_index(ox, oy))] = w;
          total += w;
        }
      }
      for (int u = 0; u < kNumActions; ++u) {
        for (int obs = 0; obs < num_states; ++obs) {
          m.likelihood(u, from, obs) =
              weights[static_cast<std::size_t>(obs)] / total;
        }
        m.obs_rate[static_cast<std::size_t>(u)] = layout.obs_rate;
      }
    }
  }
  m.discount = layout.discount;

  for (int y = 0; y < layout.height; ++y) {
    for (int x = 0; x < layout.width; ++x) {
      std::ostringstream os;
      os << "(" << x << "," << y << ")";
      m.labels.states.push_back(os.str());
      m.labels.observations.push_back(os.str());
    }
  }
  m.labels.actions = {"up", "down", "left", "right"};
  return m;
}

PomdpModel build_env(const std::string& name) {
  if (name == "tiger") return build_tiger();
  if (name == "aloha") return build_slotted_aloha();
  if (name == "gridworld") return build_gridworld();
  throw std::invalid_argument("unknown environment '" + name + "'");
}

bool is_known_env(const std::string& name) {
  return name == "tiger" || name == "aloha" || name == "gridworld";
}

std::vector<std::string> known_envs() { return {"tiger", "aloha", "gridworld"}; }

}  // namespace ctpomdp::envs
