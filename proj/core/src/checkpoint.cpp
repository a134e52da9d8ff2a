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

#include "ctpomdp/checkpoint.hpp"

#include <stdexcept>

#include "json.hpp"

namespace ctpomdp {

std::string checkpoint_to_json(const Checkpoint& checkpoint) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["env"] = checkpoint.env;
  j["method"] = checkpoint.method;
  j["seed"] = checkpoint.seed;
  j["model"] = nlohmann::json::parse(checkpoint.model_json);
  j["config"] = checkpoint.config_json.empty()
                    ? nlohmann::json::object()
                    : nlohmann::json::parse(checkpoint.config_json);
  j["value_net"] = nlohmann::json::parse(nn::mlp_to_json(checkpoint.value_net));
  j["advantage_net"] =
      nlohmann::json::parse(nn::mlp_to_json(checkpoint.advantage_net));
  j["value_loss_trace"] = checkpoint.value_loss_trace;
  j["advantage_loss_trace"] = checkpoint.advantage_loss_trace;
  j["return_trace"] = checkpoint.return_trace;
  j["sigma_trace"] = checkpoint.sigma_trace;
  return j.dump(2);
}

Checkpoint checkpoint_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  Checkpoint checkpoint;
  checkpoint.env = j.at("env").get<std::string>();
  checkpoint.method = j.at("method").get<std::string>();
  checkpoint.seed = j.at("seed").get<std::uint64_t>();
  checkpoint.model_json = j.at("model").dump();
  checkpoint.config_json = j.at("config").dump();
  checkpoint.value_net = nn::mlp_from_json(j.at("value_net").dump());
  checkpoint.advantage_net = nn::mlp_from_json(j.at("advantage_net").dump());
  checkpoint.value_loss_trace =
      j.at("value_loss_trace").get<std::vector<double>>();
  checkpoint.advantage_loss_trace =
      j.at("advantage_loss_trace").get<std::vector<double>>();
  checkpoint.return_trace = j.at("return_trace").get<std::vector<double>>();
  checkpoint.sigma_trace = j.at("sigma_trace").get<std::vector<double>>();
  return checkpoint;
}

}  // namespace ctpomdp
