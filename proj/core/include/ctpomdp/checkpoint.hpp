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

#ifndef CTPOMDP_CHECKPOINT_HPP_
#define CTPOMDP_CHECKPOINT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "ctpomdp/nn.hpp"

namespace ctpomdp {

inline constexpr const char* kVersion = "0.1.0";

/// Trained-run artifact shared by both trainers: the networks, the resolved
/// config, the seed and the loss traces. Serialized as one JSON document.
struct Checkpoint {
  std::string env;     // environment name, or "custom"
  std::string method;  // "collocation" or "au"
  std::uint64_t seed = 0;
  std::string model_json;   // the exact model the networks were trained on
  std::string config_json;  // resolved config echo
  nn::Mlp value_net;
  nn::Mlp advantage_net;
  std::vector<double> value_loss_trace;
  std::vector<double> advantage_loss_trace;
  std::vector<double> return_trace;
  std::vector<double> sigma_trace;
};

std::string checkpoint_to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const std::string& text);

}  // namespace ctpomdp

#endif  // CTPOMDP_CHECKPOINT_HPP_
