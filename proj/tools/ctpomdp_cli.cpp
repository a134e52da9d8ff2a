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

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "ctpomdp/au.hpp"
#include "ctpomdp/checkpoint.hpp"
#include "ctpomdp/envs.hpp"
#include "ctpomdp/hjb.hpp"
#include "ctpomdp/model.hpp"
#include "ctpomdp/nn.hpp"
#include "ctpomdp/rng.hpp"
#include "ctpomdp/sim.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ctpomdp;

namespace {

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError("cannot read file '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliError("cannot write file '" + path.string() + "'");
  out << content;
  if (!out) throw CliError("write failed for '" + path.string() + "'");
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Run configuration: defaults -> config file -> flags -> --set overrides,
// echoed in full to config.json so no default stays hidden.
// ---------------------------------------------------------------------------

struct RunInputs {
  std::string env;         // environment name, empty when a model file is used
  std::string model_path;  // custom model JSON
  std::string config_path;
  std::vector<std::string> overrides;  // key=value, dotted paths
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out_dir;
};

std::uint64_t resolve_seed(const RunInputs& inputs) {
  if (inputs.seed_given) return inputs.seed;
  if (const char* env = std::getenv("CTPOMDP_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw CliError("CTPOMDP_SEED is not an unsigned integer");
    }
  }
  return 0;
}

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw CliError("override '" + assignment + "' is not key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);

  json* node = &config;
  std::istringstream keys(path);
  std::string key;
  std::vector<std::string> parts;
  while (std::getline(keys, key, '.')) parts.push_back(key);
  if (parts.empty()) throw CliError("override '" + assignment + "' has no key");
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->contains(parts[i]))
      throw CliError("unknown config section '" + parts[i] + "'");
    node = &(*node)[parts[i]];
  }
  const std::string& leaf = parts.back();
  if (!node->contains(leaf)) throw CliError("unknown config key '" + path + "'");
  json& slot = (*node)[leaf];
  try {
    if (slot.is_boolean()) {
      slot = (value == "true" || value == "1");
    } else if (slot.is_number_integer() || slot.is_number_unsigned()) {
      slot = std::stoll(value);
    } else if (slot.is_number_float()) {
      slot = std::stod(value);
    } else {
      slot = value;
    }
  } catch (const std::exception&) {
    throw CliError("cannot parse override value '" + value + "' for '" + path + "'");
  }
}

json base_config(const RunInputs& inputs, const std::string& method) {
  json config;
  config["method"] = method;
  config["env"] = inputs.env.empty() ? "custom" : inputs.env;
  if (!inputs.model_path.empty()) config["model_file"] = inputs.model_path;
  config["seed"] = resolve_seed(inputs);
  config["integrator"] = {{"dt", 1e-3}};
  return config;
}

void merge_config_file(json& config, const RunInputs& inputs) {
  if (inputs.config_path.empty()) return;
  const json file = json::parse(read_file(inputs.config_path));
  config.merge_patch(file);
}

void apply_overrides(json& config, const RunInputs& inputs) {
  for (const auto& assignment : inputs.overrides) apply_override(config, assignment);
}

PomdpModel load_model(const RunInputs& inputs, const json& config) {
  PomdpModel model;
  if (!inputs.model_path.empty()) {
    model = model_from_json(read_file(inputs.model_path));
  } else if (!inputs.env.empty()) {
    model = envs::build_env(inputs.env);
  } else {
    throw CliError("either --env or --model is required");
  }
  if (config.contains("discount")) model.discount = config.at("discount").get<double>();
  const auto violations = model.validate();
  if (!violations.empty()) {
    std::ostringstream os;
    os << "model invalid: " << violations.front();
    if (violations.size() > 1) os << " (+" << violations.size() - 1 << " more)";
    throw CliError(os.str());
  }
  return model;
}

fs::path prepare_out_dir(const RunInputs& inputs) {
  if (inputs.out_dir.empty()) throw CliError("--out directory is required");
  fs::path dir(inputs.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw CliError("cannot create output directory '" + dir.string() + "'");
  return dir;
}

void write_manifest(const fs::path& dir, const json& config,
                    const json& extra_files) {
  json manifest;
  manifest["version"] = kVersion;
  manifest["method"] = config.at("method");
  manifest["env"] = config.at("env");
  manifest["seed"] = config.at("seed");
  manifest["config"] = config;
  manifest["files"] = extra_files;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

// Default episode horizons per task (the advantage-updating episode lengths).
double default_horizon(const std::string& env) {
  if (env == "tiger") return 10.0;
  if (env == "aloha") return 20.0;
  if (env == "gridworld") return 5.0;
  return 10.0;
}

sim::InitialBeliefSampler make_initial_belief_sampler(int num_states,
                                                      double alpha) {
  return [num_states, alpha](Rng& rng) {
    return hjb::sample_collocation_belief(num_states, alpha, rng);
  };
}

// ---------------------------------------------------------------------------
// Policies available on the command line.
// ---------------------------------------------------------------------------

class RandomPolicy final : public Policy {
 public:
  RandomPolicy(int num_actions, std::uint64_t seed)
      : num_actions_(num_actions), rng_(seed) {}
  int action(const Belief&, double) override {
    return rng_.uniform_int(num_actions_);
  }

 private:
  int num_actions_;
  Rng rng_;
};

struct PolicySpec {
  enum class Kind { kRandom, kConstant, kGreedy } kind = Kind::kRandom;
  int constant_action = 0;
};

PolicySpec parse_policy(const std::string& text) {
  PolicySpec spec;
  if (text == "random") {
    spec.kind = PolicySpec::Kind::kRandom;
  } else if (text == "greedy") {
    spec.kind = PolicySpec::Kind::kGreedy;
  } else if (text.rfind("constant:", 0) == 0) {
    spec.kind = PolicySpec::Kind::kConstant;
    try {
      spec.constant_action = std::stoi(text.substr(9));
    } catch (const std::exception&) {
      throw CliError("cannot parse constant policy '" + text + "'");
    }
  } else {
    throw CliError("unknown policy '" + text +
                   "' (expected random, greedy or constant:<u>)");
  }
  return spec;
}

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const PomdpModel& model,
                                    const nn::Mlp* advantage_net,
                                    std::uint64_t seed) {
  switch (spec.kind) {
    case PolicySpec::Kind::kRandom:
      return std::make_unique<RandomPolicy>(model.num_actions, seed);
    case PolicySpec::Kind::kConstant:
      if (spec.constant_action < 0 || spec.constant_action >= model.num_actions)
        throw CliError("constant policy action out of range");
      return std::make_unique<ConstantPolicy>(spec.constant_action);
    case PolicySpec::Kind::kGreedy:
      if (!advantage_net) throw CliError("greedy policy requires --checkpoint");
      return std::make_unique<hjb::GreedyAdvantagePolicy>(*advantage_net);
  }
  throw CliError("unreachable policy kind");
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

void write_aloha_marginals(const fs::path& path, const sim::Episode& episode) {
  std::ostringstream os;
  os << "t,n_true,c_true,u";
  for (int n = 0; n <= 9; ++n) os << ",belief_n_" << n;
  os << ",belief_c_idle,belief_c_transmission,belief_c_collision\n";
  for (const auto& s : episode.grid) {
    os << format_double(s.t) << "," << s.x / 3 << "," << s.x % 3 << "," << s.u;
    double by_n[10] = {0};
    double by_c[3] = {0};
    for (int x = 0; x < s.belief.size(); ++x) {
      by_n[x / 3] += s.belief[x];
      by_c[x % 3] += s.belief[x];
    }
    for (double v : by_n) os << "," << format_double(v);
    for (double v : by_c) os << "," << format_double(v);
    os << "\n";
  }
  write_file(path, os.str());
}

int run_simulate(const RunInputs& inputs, double horizon_flag,
                 const std::string& policy_text, const std::string& checkpoint_path) {
  json config = base_config(inputs, "simulate");
  config["horizon"] = horizon_flag;
  config["policy"] = policy_text;
  config["dirichlet_alpha"] = 0.1;
  merge_config_file(config, inputs);
  apply_overrides(config, inputs);

  const auto model = load_model(inputs, config);
  if (!(config.at("horizon").get<double>() > 0.0))
    config["horizon"] = default_horizon(config.at("env").get<std::string>());

  const auto dir = prepare_out_dir(inputs);
  const std::uint64_t seed = config.at("seed").get<std::uint64_t>();

  std::optional<Checkpoint> checkpoint;
  const PolicySpec spec = parse_policy(config.at("policy").get<std::string>());
  if (spec.kind == PolicySpec::Kind::kGreedy) {
    if (checkpoint_path.empty()) throw CliError("greedy policy requires --checkpoint");
    checkpoint = checkpoint_from_json(read_file(checkpoint_path));
  }
  auto policy = make_policy(spec, model,
                            checkpoint ? &checkpoint->advantage_net : nullptr,
                            derive_seed(seed, 0xF00D));

  filter::IntegratorConfig integrator;
  integrator.dt = config.at("integrator").at("dt").get<double>();
  auto sampler = make_initial_belief_sampler(
      model.num_states, config.at("dirichlet_alpha").get<double>());
  const auto episode =
      sim::simulate_episode(model, *policy, config.at("horizon").get<double>(),
                            sampler, seed, integrator);

  write_file(dir / "episode.csv", sim::episode_to_csv(episode));
  write_file(dir / "episode.json", sim::episode_to_json(episode) + "\n");
  if (config.at("env") == "aloha")
    write_aloha_marginals(dir / "episode_marginals.csv", episode);
  write_file(dir / "config.json", config.dump(2) + "\n");
  write_manifest(dir, config,
                 {{"episode_csv", "episode.csv"}, {"episode_json", "episode.json"}});
  std::cout << "simulate: wrote " << (dir / "episode.csv").string()
            << " (discounted return " << format_double(episode.discounted_return)
            << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// training
// ---------------------------------------------------------------------------

hjb::CollocationConfig collocation_from_json(const json& section) {
  hjb::CollocationConfig config;
  config.episodes = section.at("episodes").get<long>();
  config.batch_size = section.at("batch_size").get<int>();
  config.steps_per_batch = section.at("steps_per_batch").get<int>();
  config.dirichlet_alpha = section.at("dirichlet_alpha").get<double>();
  config.discount_decay_steps = section.at("discount_decay_steps").get<long>();
  config.tau_min_factor = section.at("tau_min_factor").get<double>();
  config.adam.learning_rate = section.at("learning_rate").get<double>();
  config.adam.beta1 = section.at("adam_beta1").get<double>();
  config.adam.beta2 = section.at("adam_beta2").get<double>();
  config.adam.epsilon = section.at("adam_epsilon").get<double>();
  config.advantage_episodes = section.at("advantage_episodes").get<long>();
  config.printed_sign_variant = section.at("printed_sign_variant").get<bool>();
  return config;
}

json collocation_defaults() {
  return {{"episodes", 10000},
          {"batch_size", 256},
          {"steps_per_batch", 1},
          {"dirichlet_alpha", 0.1},
          {"discount_decay_steps", 500},
          {"tau_min_factor", 0.1},
          {"learning_rate", 1e-3},
          {"adam_beta1", 0.9},
          {"adam_beta2", 0.999},
          {"adam_epsilon", 1e-8},
          {"advantage_episodes", -1},
          {"printed_sign_variant", false}};
}

std::string loss_csv(const std::vector<double>& trace) {
  std::ostringstream os;
  os << "episode,mean_loss\n";
  for (std::size_t i = 0; i < trace.size(); ++i)
    os << i << "," << format_double(trace[i]) << "\n";
  return os.str();
}

int run_train_collocation(const RunInputs& inputs) {
  json config = base_config(inputs, "train-collocation");
  config["collocation"] = collocation_defaults();
  merge_config_file(config, inputs);
  apply_overrides(config, inputs);

  const auto model = load_model(inputs, config);
  const auto dir = prepare_out_dir(inputs);
  const std::uint64_t seed = config.at("seed").get<std::uint64_t>();
  const auto cfg = collocation_from_json(config.at("collocation"));

  auto value = hjb::collocation_train_value(model, cfg, derive_seed(seed, 1));
  auto advantage = hjb::fit_advantage(model, value.net, cfg, derive_seed(seed, 2));

  Checkpoint checkpoint;
  checkpoint.env = config.at("env").get<std::string>();
  checkpoint.method = "collocation";
  checkpoint.seed = seed;
  checkpoint.model_json = model_to_json(model);
  checkpoint.config_json = config.dump();
  checkpoint.value_net = std::move(value.net);
  checkpoint.advantage_net = std::move(advantage.net);
  checkpoint.value_loss_trace = std::move(value.loss_trace);
  checkpoint.advantage_loss_trace = std::move(advantage.loss_trace);

  write_file(dir / "checkpoint.json", checkpoint_to_json(checkpoint) + "\n");
  write_file(dir / "value_loss.csv", loss_csv(checkpoint.value_loss_trace));
  write_file(dir / "advantage_loss.csv", loss_csv(checkpoint.advantage_loss_trace));
  write_file(dir / "config.json", config.dump(2) + "\n");
  write_manifest(dir, config,
                 {{"checkpoint", "checkpoint.json"},
                  {"value_loss", "value_loss.csv"},
                  {"advantage_loss", "advantage_loss.csv"}});
  std::cout << "train-collocation: final value loss "
            << format_double(checkpoint.value_loss_trace.back())
            << ", advantage loss "
            << format_double(checkpoint.advantage_loss_trace.back()) << "\n";
  return 0;
}

json au_defaults(const std::string& env) {
  au::AuConfig defaults;
  try {
    defaults = au::default_au_config(env);
  } catch (const std::invalid_argument&) {
    // custom models keep the generic defaults
  }
  return {{"episodes", defaults.episodes},
          {"steps_per_episode", defaults.steps_per_episode},
          {"batch_size", defaults.batch_size},
          {"episode_length", defaults.episode_length},
          {"subsample_count", defaults.subsample_count},
          {"ou_kappa", defaults.ou_kappa},
          {"ou_sigma_start", defaults.ou_sigma_start},
          {"ou_sigma_end", defaults.ou_sigma_end},
          {"replay_capacity", defaults.replay_capacity},
          {"dirichlet_alpha", defaults.dirichlet_alpha},
          {"learning_rate", 1e-3},
          {"adam_beta1", 0.9},
          {"adam_beta2", 0.999},
          {"adam_epsilon", 1e-8},
          {"sampled_jump_term", false}};
}

au::AuConfig au_from_json(const json& section, double dt) {
  au::AuConfig config;
  config.episodes = section.at("episodes").get<long>();
  config.steps_per_episode = section.at("steps_per_episode").get<int>();
  config.batch_size = section.at("batch_size").get<int>();
  config.episode_length = section.at("episode_length").get<double>();
  config.subsample_count = section.at("subsample_count").get<int>();
  config.ou_kappa = section.at("ou_kappa").get<double>();
  config.ou_sigma_start = section.at("ou_sigma_start").get<double>();
  config.ou_sigma_end = section.at("ou_sigma_end").get<double>();
  config.replay_capacity = section.at("replay_capacity").get<std::size_t>();
  config.dirichlet_alpha = section.at("dirichlet_alpha").get<double>();
  config.adam.learning_rate = section.at("learning_rate").get<double>();
  config.adam.beta1 = section.at("adam_beta1").get<double>();
  config.adam.beta2 = section.at("adam_beta2").get<double>();
  config.adam.epsilon = section.at("adam_epsilon").get<double>();
  config.td.sampled_jump_term = section.at("sampled_jump_term").get<bool>();
  config.integrator.dt = dt;
  return config;
}

int run_train_au(const RunInputs& inputs) {
  json config = base_config(inputs, "train-au");
  config["au"] = au_defaults(inputs.env);
  merge_config_file(config, inputs);
  apply_overrides(config, inputs);

  const auto model = load_model(inputs, config);
  const auto dir = prepare_out_dir(inputs);
  const std::uint64_t seed = config.at("seed").get<std::uint64_t>();
  const auto cfg =
      au_from_json(config.at("au"), config.at("integrator").at("dt").get<double>());

  auto result = au::train_advantage_updating(model, cfg, seed);

  Checkpoint checkpoint;
  checkpoint.env = config.at("env").get<std::string>();
  checkpoint.method = "au";
  checkpoint.seed = seed;
  checkpoint.model_json = model_to_json(model);
  checkpoint.config_json = config.dump();
  checkpoint.value_net = std::move(result.value_net);
  checkpoint.advantage_net = std::move(result.advantage_net);
  checkpoint.value_loss_trace = result.loss_trace;
  checkpoint.return_trace = result.return_trace;
  checkpoint.sigma_trace = result.sigma_trace;

  std::ostringstream metrics;
  metrics << "episode,mean_loss,return,sigma\n";
  for (std::size_t i = 0; i < result.loss_trace.size(); ++i) {
    metrics << i << "," << format_double(result.loss_trace[i]) << ","
            << format_double(result.return_trace[i]) << ","
            << format_double(result.sigma_trace[i]) << "\n";
  }

  write_file(dir / "checkpoint.json", checkpoint_to_json(checkpoint) + "\n");
  write_file(dir / "metrics.csv", metrics.str());
  write_file(dir / "config.json", config.dump(2) + "\n");
  write_manifest(dir, config,
                 {{"checkpoint", "checkpoint.json"}, {"metrics", "metrics.csv"}});
  std::cout << "train-au: final loss " << format_double(result.loss_trace.back())
            << ", final return " << format_double(result.return_trace.back())
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EpisodeMetrics {
  double discounted_return = 0.0;
  std::vector<double> action_time;  // held time per action
  long observations = 0;
  long jumps = 0;
};

EpisodeMetrics summarize(const sim::Episode& episode, int num_actions) {
  EpisodeMetrics metrics;
  metrics.discounted_return = episode.discounted_return;
  metrics.action_time.assign(static_cast<std::size_t>(num_actions), 0.0);
  for (std::size_t i = 1; i < episode.grid.size(); ++i) {
    const auto& prev = episode.grid[i - 1];
    metrics.action_time[static_cast<std::size_t>(prev.u)] +=
        episode.grid[i].t - prev.t;
  }
  for (const auto& ev : episode.events) {
    if (ev.kind == sim::EventKind::kObservation) ++metrics.observations;
    if (ev.kind == sim::EventKind::kJump) ++metrics.jumps;
  }
  return metrics;
}

int run_evaluate(const RunInputs& inputs, const std::string& checkpoint_path,
                 long episodes, double horizon_flag, const std::string& policy_text,
                 long traces, int workers, const std::string& manifest_path) {
  json config;
  std::string effective_checkpoint = checkpoint_path;
  if (!manifest_path.empty()) {
    const json manifest = json::parse(read_file(manifest_path));
    config = manifest.at("config");
    if (config.at("method") != "evaluate")
      throw CliError("manifest does not describe an evaluate run");
    effective_checkpoint = config.at("checkpoint").get<std::string>();
    // Resolve a relative checkpoint path against the manifest location.
    const fs::path stored(effective_checkpoint);
    if (!stored.is_absolute()) {
      const auto resolved = fs::path(manifest_path).parent_path() / stored;
      if (fs::exists(resolved)) effective_checkpoint = resolved.string();
    }
  } else {
    config = base_config(inputs, "evaluate");
    if (effective_checkpoint.empty())
      throw CliError("evaluate requires --checkpoint (or --from-manifest)");
    config["checkpoint"] = effective_checkpoint;
    config["episodes"] = episodes;
    config["horizon"] = horizon_flag;
    config["policy"] = policy_text;
    config["traces"] = traces;
    config["workers"] = workers;
    config["dirichlet_alpha"] = 0.1;
    merge_config_file(config, inputs);
    apply_overrides(config, inputs);
  }

  const auto checkpoint = checkpoint_from_json(read_file(effective_checkpoint));
  const auto model = model_from_json(checkpoint.model_json);
  {
    const auto violations = model.validate();
    if (!violations.empty()) throw CliError("checkpoint model invalid");
  }
  if (config.at("env").get<std::string>() == "custom" || !manifest_path.empty()) {
    config["env"] = checkpoint.env;
  } else if (config.at("env") != checkpoint.env) {
    throw CliError("checkpoint was trained on '" + checkpoint.env + "', not '" +
                   config.at("env").get<std::string>() + "'");
  }
  if (!(config.at("horizon").get<double>() > 0.0))
    config["horizon"] = default_horizon(checkpoint.env);

  const auto dir = prepare_out_dir(inputs);
  const std::uint64_t seed = config.at("seed").get<std::uint64_t>();
  const long n_episodes = config.at("episodes").get<long>();
  if (n_episodes <= 0) throw CliError("evaluate needs a positive episode count");
  const double horizon = config.at("horizon").get<double>();
  const long keep_traces = std::min<long>(config.at("traces").get<long>(), n_episodes);
  const int n_workers = std::max(1, config.at("workers").get<int>());
  const PolicySpec spec = parse_policy(config.at("policy").get<std::string>());

  filter::IntegratorConfig integrator;
  integrator.dt = config.at("integrator").at("dt").get<double>();
  auto sampler = make_initial_belief_sampler(
      model.num_states, config.at("dirichlet_alpha").get<double>());

  std::vector<EpisodeMetrics> metrics(static_cast<std::size_t>(n_episodes));
  std::vector<sim::Episode> kept(static_cast<std::size_t>(keep_traces));

  auto run_episode = [&](long index) {
    // One policy instance per episode: greedy is stateless, random keeps a
    // per-episode stream, so results do not depend on scheduling.
    const std::uint64_t episode_seed =
        derive_seed(seed, static_cast<std::uint64_t>(index));
    auto policy = make_policy(spec, model, &checkpoint.advantage_net,
                              derive_seed(episode_seed, 0xF00D));
    auto episode = sim::simulate_episode(model, *policy, horizon, sampler,
                                         episode_seed, integrator);
    metrics[static_cast<std::size_t>(index)] = summarize(episode, model.num_actions);
    if (index < keep_traces) kept[static_cast<std::size_t>(index)] = std::move(episode);
  };

  if (n_workers <= 1) {
    for (long i = 0; i < n_episodes; ++i) run_episode(i);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) {
      pool.emplace_back([&, w]() {
        for (long i = w; i < n_episodes; i += n_workers) run_episode(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  double mean = 0.0;
  for (const auto& m : metrics) mean += m.discounted_return;
  mean /= static_cast<double>(n_episodes);
  double variance = 0.0;
  for (const auto& m : metrics) {
    const double d = m.discounted_return - mean;
    variance += d * d;
  }
  variance = n_episodes > 1 ? variance / static_cast<double>(n_episodes - 1) : 0.0;
  std::vector<double> occupancy(static_cast<std::size_t>(model.num_actions), 0.0);
  double total_time = 0.0;
  for (const auto& m : metrics)
    for (std::size_t u = 0; u < occupancy.size(); ++u) {
      occupancy[u] += m.action_time[u];
      total_time += m.action_time[u];
    }
  if (total_time > 0.0)
    for (auto& o : occupancy) o /= total_time;

  json summary;
  summary["episodes"] = n_episodes;
  summary["seed"] = seed;
  summary["policy"] = config.at("policy");
  summary["mean_discounted_return"] = mean;
  summary["std_discounted_return"] = std::sqrt(variance);
  summary["action_occupancy"] = occupancy;
  if (!model.labels.actions.empty()) summary["action_labels"] = model.labels.actions;
  write_file(dir / "summary.json", summary.dump(2) + "\n");

  std::ostringstream per_episode;
  per_episode << "episode,return,observations,jumps\n";
  for (long i = 0; i < n_episodes; ++i) {
    const auto& m = metrics[static_cast<std::size_t>(i)];
    per_episode << i << "," << format_double(m.discounted_return) << ","
                << m.observations << "," << m.jumps << "\n";
  }
  write_file(dir / "episodes.csv", per_episode.str());

  for (long i = 0; i < keep_traces; ++i) {
    std::ostringstream name;
    name << "trace_ep" << i << ".csv";
    write_file(dir / name.str(),
               sim::episode_to_csv(kept[static_cast<std::size_t>(i)]));
    if (checkpoint.env == "aloha") {
      std::ostringstream marg;
      marg << "trace_ep" << i << "_marginals.csv";
      write_aloha_marginals(dir / marg.str(), kept[static_cast<std::size_t>(i)]);
    }
  }

  write_file(dir / "config.json", config.dump(2) + "\n");
  write_manifest(dir, config,
                 {{"summary", "summary.json"}, {"episodes", "episodes.csv"}});
  std::cout << "evaluate: mean discounted return " << format_double(mean)
            << " over " << n_episodes << " episodes\n";
  return 0;
}

// ---------------------------------------------------------------------------
// export-value-grid
// ---------------------------------------------------------------------------

std::string sanitize(const std::string& label) {
  std::string out = label;
  for (auto& c : out)
    if (c == ',' || c == ' ') c = '_';
  return out;
}

int run_export_value_grid(const RunInputs& inputs, const std::string& checkpoint_path,
                          long resolution) {
  json config = base_config(inputs, "export-value-grid");
  if (checkpoint_path.empty()) throw CliError("export-value-grid requires --checkpoint");
  config["checkpoint"] = checkpoint_path;
  config["resolution"] = resolution;
  merge_config_file(config, inputs);
  apply_overrides(config, inputs);

  const auto checkpoint = checkpoint_from_json(read_file(checkpoint_path));
  const auto model = model_from_json(checkpoint.model_json);
  if (checkpoint.value_net.in_dim() != model.num_states ||
      checkpoint.advantage_net.out_dim() != model.num_actions)
    throw CliError("checkpoint networks do not match the embedded model");
  config["env"] = checkpoint.env;
  const auto dir = prepare_out_dir(inputs);

  auto action_label = [&](int u) {
    return model.labels.actions.empty()
               ? "a" + std::to_string(u)
               : sanitize(model.labels.actions[static_cast<std::size_t>(u)]);
  };
  auto greedy_label = [&](const Belief& b) {
    return action_label(hjb::greedy_action(checkpoint.advantage_net, b));
  };

  std::ostringstream os;
  if (model.num_states == 2) {
    const long n = config.at("resolution").get<long>();
    if (n < 1) throw CliError("resolution must be at least 1");
    os << "pi_0,V";
    for (int u = 0; u < model.num_actions; ++u) os << ",A_" << action_label(u);
    os << ",greedy\n";
    for (long i = 0; i <= n; ++i) {
      const double p = static_cast<double>(i) / static_cast<double>(n);
      const Belief b{p, 1.0 - p};
      os << format_double(p) << ","
         << format_double(checkpoint.value_net.forward_scalar(b.p));
      for (double a : hjb::reparameterized_advantages(checkpoint.advantage_net, b))
        os << "," << format_double(a);
      os << "," << greedy_label(b) << "\n";
    }
  } else if (checkpoint.env == "gridworld") {
    envs::GridworldLayout layout;
    os << "x,y,is_wall,V";
    for (int u = 0; u < model.num_actions; ++u) os << ",A_" << action_label(u);
    os << ",greedy\n";
    for (int y = 0; y < layout.height; ++y) {
      for (int x = 0; x < layout.width; ++x) {
        const Belief b =
            Belief::point_mass(model.num_states, layout.cell_index(x, y));
        os << x << "," << y << "," << (layout.is_wall(x, y) ? 1 : 0) << ","
           << format_double(checkpoint.value_net.forward_scalar(b.p));
        for (double a : hjb::reparameterized_advantages(checkpoint.advantage_net, b))
          os << "," << format_double(a);
        os << "," << greedy_label(b) << "\n";
      }
    }
  } else {
    // Generic fallback: point-mass beliefs on every state.
    os << "state,label,V";
    for (int u = 0; u < model.num_actions; ++u) os << ",A_" << action_label(u);
    os << ",greedy\n";
    for (int x = 0; x < model.num_states; ++x) {
      const Belief b = Belief::point_mass(model.num_states, x);
      os << x << ","
         << (model.labels.states.empty()
                 ? std::to_string(x)
                 : sanitize(model.labels.states[static_cast<std::size_t>(x)]))
         << "," << format_double(checkpoint.value_net.forward_scalar(b.p));
      for (double a : hjb::reparameterized_advantages(checkpoint.advantage_net, b))
        os << "," << format_double(a);
      os << "," << greedy_label(b) << "\n";
    }
  }
  write_file(dir / "value_grid.csv", os.str());
  write_file(dir / "config.json", config.dump(2) + "\n");
  write_manifest(dir, config, {{"value_grid", "value_grid.csv"}});
  std::cout << "export-value-grid: wrote " << (dir / "value_grid.csv").string()
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// validate-model
// ---------------------------------------------------------------------------

int run_validate_model(const RunInputs& inputs) {
  PomdpModel model;
  if (!inputs.model_path.empty()) {
    model = model_from_json(read_file(inputs.model_path));
  } else if (!inputs.env.empty()) {
    model = envs::build_env(inputs.env);
  } else {
    throw CliError("either --env or --model is required");
  }
  const auto violations = model.validate();
  if (violations.empty()) {
    std::cout << "ok\n";
    return 0;
  }
  for (const auto& v : violations) std::cout << "violation: " << v << "\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "continuous-time POMDP toolkit: filtering, simulation and belief-space "
      "policy learning"};
  app.require_subcommand(1);

  RunInputs inputs;
  double horizon = -1.0;
  std::string policy_text = "random";
  std::string checkpoint_path;
  std::string manifest_path;
  long episodes = 100;
  long traces = 5;
  long resolution = 100;
  int workers = 1;

  auto add_common = [&](CLI::App* cmd, bool needs_out) {
    cmd->add_option("--env", inputs.env,
                    "bundled environment (tiger|aloha|gridworld)");
    cmd->add_option("--model", inputs.model_path, "custom model JSON file");
    cmd->add_option("--config", inputs.config_path,
                    "JSON config file merged over defaults");
    cmd->add_option("--set", inputs.overrides,
                    "config override key=value (dotted path, repeatable)");
    auto* seed_opt = cmd->add_option(
        "--seed", inputs.seed, "master seed (fallback: CTPOMDP_SEED, then 0)");
    cmd->parse_complete_callback(
        [&inputs, seed_opt]() { inputs.seed_given = seed_opt->count() > 0; });
    if (needs_out)
      cmd->add_option("--out", inputs.out_dir, "output run directory")->required();
  };

  auto* simulate =
      app.add_subcommand("simulate", "simulate one episode and write its trace");
  add_common(simulate, true);
  simulate->add_option("--horizon", horizon, "episode length (default: task table)");
  simulate->add_option("--policy", policy_text, "random | constant:<u> | greedy");
  simulate->add_option("--checkpoint", checkpoint_path, "checkpoint for greedy policy");

  auto* train_col = app.add_subcommand("train-collocation",
                                       "offline value collocation + advantage fit");
  add_common(train_col, true);

  auto* train_au = app.add_subcommand("train-au", "online advantage updating");
  add_common(train_au, true);

  auto* evaluate =
      app.add_subcommand("evaluate", "roll out a policy and report metrics");
  add_common(evaluate, true);
  evaluate->add_option("--checkpoint", checkpoint_path, "trained checkpoint JSON");
  evaluate->add_option("--episodes", episodes, "number of evaluation episodes");
  evaluate->add_option("--horizon", horizon, "episode length (default: task table)");
  auto* eval_policy =
      evaluate->add_option("--policy", policy_text, "greedy | random | constant:<u>");
  evaluate->add_option("--traces", traces, "number of episode traces to write");
  evaluate->add_option(
      "--workers", workers,
      "episode workers (per-episode seeds keep results scheduling-independent)");
  evaluate->add_option("--from-manifest", manifest_path,
                       "re-run an evaluation from its manifest.json");

  auto* export_grid =
      app.add_subcommand("export-value-grid", "tabulate V and A for plotting");
  add_common(export_grid, true);
  export_grid->add_option("--checkpoint", checkpoint_path, "trained checkpoint JSON");
  export_grid->add_option("--resolution", resolution,
                          "belief grid resolution (2-state models)");

  auto* validate = app.add_subcommand("validate-model", "check model invariants");
  add_common(validate, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (evaluate->parsed() && eval_policy->count() == 0) policy_text = "greedy";
    if (simulate->parsed())
      return run_simulate(inputs, horizon, policy_text, checkpoint_path);
    if (train_col->parsed()) return run_train_collocation(inputs);
    if (train_au->parsed()) return run_train_au(inputs);
    if (evaluate->parsed())
      return run_evaluate(inputs, checkpoint_path, episodes, horizon, policy_text,
                          traces, workers, manifest_path);
    if (export_grid->parsed())
      return run_export_value_grid(inputs, checkpoint_path, resolution);
    if (validate->parsed()) return run_validate_model(inputs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "error: no subcommand\n";
  return 1;
}
