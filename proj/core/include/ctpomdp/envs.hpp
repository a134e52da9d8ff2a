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

#ifndef CTPOMDP_ENVS_HPP_
#define CTPOMDP_ENVS_HPP_

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "ctpomdp/model.hpp"

namespace ctpomdp::envs {

/// Tiger-behind-a-door task: two latent positions, actions listen/open-left/
/// open-right, noisy hearing observations while listening.
PomdpModel build_tiger();

struct AlohaConfig {
  int max_packages = 9;       // states are (n, channel) with n in 0..max
  double arrival_rate = 0.5;  // new package arrivals while below the cap
  double send_rate = 5.0;     // send events while packages are pending
  double obs_rate = 0.5;      // channel-memory observation intensity
  double discount = 0.9;
  /// False (default): reward rate is the expected instantaneous throughput
  /// send_rate * rho * (1 - rho)^(n-1). True: an indicator reward of rate 1
  /// whenever the channel memory reads "transmission".
  bool indicator_reward = false;
};

/// Slotted-Aloha transmission task. States are (pending packages n, channel
/// memory c) with c in {idle, transmission, collision}; actions are the send
/// probabilities 1/1, 1/2, ..., 1/9; the channel memory is observed exactly
/// at random times.
PomdpModel build_slotted_aloha(const AlohaConfig& config = {});

/// Channel outcome distribution of a send event with n pending packages and
/// per-station send probability rho: (idle, transmission, collision).
std::array<double, 3> aloha_channel_probs(int n, double rho);

/// Send probability maximizing the transmission probability, 1/n.
double aloha_optimal_rho(int n);

struct GridworldLayout {
  int width = 6;
  int height = 6;
  int goal_x = 3;
  int goal_y = 2;
  /// Wall cells as (x, y) pairs; origin (0,0) is the bottom-left cell.
  /// Default: row y=3 blocked at columns 0..4, one passage at column 5.
  std::vector<std::pair<int, int>> walls = {
      {0, 3}, {1, 3}, {2, 3}, {3, 3}, {4, 3}};
  double move_rate = 10.0;
  double slip_prob = 0.1;  // per off-direction
  double obs_rate = 2.0;
  double obs_sigma = 0.1;  // cells
  double goal_reward_rate = 1.0;
  double discount = 0.9;

  int cell_index(int x, int y) const { return y * width + x; }
  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }
  bool is_wall(int x, int y) const;
};

/// Navigation task on a grid: move events at a fixed rate with slip, reward
/// at the goal cell, position observed through a discretized Gaussian.
/// Throws std::invalid_argument if the non-wall cells are not connected or
/// the goal lies in a wall.
PomdpModel build_gridworld(const GridworldLayout& layout = {});

/// Environment registry for the CLI: "tiger", "aloha", "gridworld".
/// Throws std::invalid_argument for unknown names.
PomdpModel build_env(const std::string& name);
bool is_known_env(const std::string& name);
std::vector<std::string> known_envs();

}  // namespace ctpomdp::envs

#endif  // CTPOMDP_ENVS_HPP_
