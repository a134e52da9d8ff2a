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

#include "ctpomdp/sim.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ctpomdp::sim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const char* kind_name(EventKind kind) {
  switch (kind) {
    case EventKind::kJump: return "jump";
    case EventKind::kObservation: return "observation";
    case EventKind::kActionChange: return "action-change";
  }
  return "?";
}

EventKind kind_from_name(const std::string& name) {
  if (name == "jump") return EventKind::kJump;
  if (name == "observation") return EventKind::kObservation;
  if (name == "action-change") return EventKind::kActionChange;
  throw std::invalid_argument("unknown event kind '" + name + "'");
}

}  // namespace

OuProcess OuProcess::stationary(int num_actions, double kappa, double sigma,
                                Rng& rng) {
  if (!(kappa > 0.0)) throw std::invalid_argument("OuProcess: kappa must be > 0");
  OuProcess process;
  process.kappa = kappa;
  process.sigma = sigma;
  process.values.resize(static_cast<std::size_t>(num_actions));
  const double stddev = sigma / std::sqrt(2.0 * kappa);
  for (auto& v : process.values) v = stddev * rng.normal();
  return process;
}

void OuProcess::step(double dt, Rng& rng) {
  if (!(dt > 0.0)) throw std::invalid_argument("OuProcess::step: dt must be > 0");
  const double decay = 1.0 - kappa * dt;
  const double noise = sigma * std::sqrt(dt);
  for (auto& v : values) v = v * decay + noise * rng.normal();
}

WaitingTimeSample sample_waiting_time(
    const PomdpModel& model, int x, const Belief& belief, Policy& policy,
    double t0, double horizon, Rng& rng,
    const filter::IntegratorConfig& config,
    std::vector<std::pair<double, Belief>>* trajectory) {
  model.check_state(x);
  if (horizon < t0)
    throw std::invalid_argument("sample_waiting_time: horizon before start");
  const double dt = config.dt;
  const double q_max = model.max_exit_rate(x);

  Belief pi = belief;
  double t = t0;
  long cell = 0;  // completed grid cells, boundaries at t0 + cell * dt
  int u = policy.action(pi, t);
  model.check_action(u);
  if (trajectory) trajectory->push_back({t, pi});

  // Advances belief and held action to `target`, re-evaluating the policy at
  // every grid boundary (zero-order hold in between).
  auto advance_to = [&](double target) {
    while (t0 + static_cast<double>(cell + 1) * dt <= target) {
      const double tb = t0 + static_cast<double>(cell + 1) * dt;
      filter::rk4_step(model, pi, u, tb - t, config.renormalization);
      t = tb;
      ++cell;
      u = policy.action(pi, t);
      model.check_action(u);
      if (trajectory) trajectory->push_back({t, pi});
    }
    if (target > t) {
      filter::rk4_step(model, pi, u, target - t, config.renormalization);
      t = target;
      if (trajectory) trajectory->push_back({t, pi});
    }
  };

  if (q_max > 0.0) {
    for (;;) {
      const double candidate = t + rng.exponential(q_max);
      if (candidate >= horizon) break;
      advance_to(candidate);
      // Accept with probability Lambda(x | held action) / q_max.
      if (rng.uniform() < model.exit_rate(x, u) / q_max) {
        return {true, t - t0, pi, u};
      }
    }
  }
  advance_to(horizon);
  return {false, horizon - t0, pi, u};
}

int sample_next_state(const PomdpModel& model, int x, int u, Rng& rng) {
  const double total = model.exit_rate(x, u);
  if (!(total > 0.0))
    throw std::domain_error("sample_next_state: zero exit rate");
  const double target = rng.uniform() * total;
  auto row = model.rate_row(u, x);
  double acc = 0.0;
  int last_positive = -1;
  for (int to = 0; to < model.num_states; ++to) {
    if (to == x) continue;
    const double r = row[static_cast<std::size_t>(to)];
    if (r <= 0.0) continue;
    acc += r;
    last_positive = to;
    if (target < acc) return to;
  }
  return last_positive;
}

std::vector<double> sample_observation_times(const PomdpModel& model,
                                             const filter::ActionSource& action_of_t,
                                             double horizon, Rng& rng) {
  if (!(horizon > 0.0))
    throw std::invalid_argument("sample_observation_times: horizon must be > 0");
  std::vector<double> times;
  const double rate_max = model.max_obs_rate();
  if (rate_max <= 0.0) return times;
  double t = 0.0;
  for (;;) {
    t += rng.exponential(rate_max);
    if (t >= horizon) break;
    const int u = action_of_t(t);
    model.check_action(u);
    if (rng.uniform() < model.obs_rate[static_cast<std::size_t>(u)] / rate_max)
      times.push_back(t);
  }
  return times;
}

int sample_observation(const PomdpModel& model, int x, int u, Rng& rng) {
  model.check_state(x);
  model.check_action(u);
  return rng.categorical(model.likelihood_row(u, x));
}

Episode simulate_episode(const PomdpModel& model, Policy& policy,
                         double horizon,
                         const InitialBeliefSampler& initial_belief,
                         std::uint64_t seed,
                         const filter::IntegratorConfig& config) {
  if (!(horizon > 0.0))
    throw std::invalid_argument("simulate_episode: horizon must be > 0");
  const double dt = config.dt;

  Episode episode;
  episode.horizon = horizon;
  episode.seed = seed;

  Rng rng(seed);
  Belief pi = initial_belief(rng);
  if (pi.size() != model.num_states)
    throw std::invalid_argument("simulate_episode: initial belief dimension");
  pi.clip_and_normalize();
  int x = rng.categorical(pi.p);
  int u = policy.action(pi, 0.0);
  model.check_action(u);

  double t = 0.0;
  long cell = 0;  // completed grid cells, boundaries at cell * dt

  auto add_sample = [&]() {
    episode.grid.push_back({t, x, u, model.reward(u, x), pi});
  };
  auto reeval_policy = [&]() {
    const int next_u = policy.action(pi, t);
    model.check_action(next_u);
    if (next_u != u) {
      EventRecord ev;
      ev.t = t;
      ev.kind = EventKind::kActionChange;
      ev.x_from = ev.x_to = x;
      ev.u = next_u;
      ev.belief_before = pi;
      ev.belief_after = pi;
      ev.grid_index = static_cast<int>(episode.grid.size()) - 1;
      episode.events.push_back(std::move(ev));
      u = next_u;
    }
  };

  add_sample();

  double q_max = model.max_exit_rate(x);
  const double obs_max = model.max_obs_rate();
  double t_jump = q_max > 0.0 ? rng.exponential(q_max) : kInf;
  double t_obs = obs_max > 0.0 ? rng.exponential(obs_max) : kInf;

  while (t < horizon) {
    const double t_event = std::min(t_jump, t_obs);
    const double t_stop = std::min(t_event, horizon);

    // Plain grid steps up to the next event or the horizon.
    while (static_cast<double>(cell + 1) * dt <= t_stop) {
      const double tb = static_cast<double>(cell + 1) * dt;
      filter::rk4_step(model, pi, u, tb - t, config.renormalization);
      t = tb;
      ++cell;
      reeval_policy();
      add_sample();
    }

    if (horizon <= t_event) {
      if (t < horizon) {
        filter::rk4_step(model, pi, u, horizon - t, config.renormalization);
        t = horizon;
        add_sample();
      }
      break;
    }

    if (t_event > t) {
      filter::rk4_step(model, pi, u, t_event - t, config.renormalization);
      t = t_event;
    }

    if (t_jump <= t_obs) {
      // Latent jump candidate, thinned by the held action's exit rate.
      if (q_max > 0.0 && rng.uniform() < model.exit_rate(x, u) / q_max) {
        add_sample();  // exact-time sample before the jump
        const int x_new = sample_next_state(model, x, u, rng);
        EventRecord ev;
        ev.t = t;
        ev.kind = EventKind::kJump;
        ev.x_from = x;
        ev.x_to = x_new;
        ev.u = u;
        ev.belief_before = pi;
        ev.belief_after = pi;
        ev.grid_index = static_cast<int>(episode.grid.size()) - 1;
        episode.events.push_back(std::move(ev));
        x = x_new;
        q_max = model.max_exit_rate(x);
        add_sample();  // reward signal switches with the latent state
      }
      t_jump = q_max > 0.0 ? t + rng.exponential(q_max) : kInf;
    } else {
      // Observation candidate, thinned by the held action's observation rate.
      if (rng.uniform() < model.obs_rate[static_cast<std::size_t>(u)] / obs_max) {
        const int y = sample_observation(model, x, u, rng);
        add_sample();  // exact-time sample carrying the pre-reset belief
        EventRecord ev;
        ev.t = t;
        ev.kind = EventKind::kObservation;
        ev.x_from = ev.x_to = x;
        ev.u = u;
        ev.y = y;
        ev.belief_before = pi;
        pi = filter::bayes_reset(model, pi, u, y);
        ev.belief_after = pi;
        ev.grid_index = static_cast<int>(episode.grid.size()) - 1;
        episode.events.push_back(std::move(ev));
        reeval_policy();
        add_sample();
      }
      t_obs = t + rng.exponential(obs_max);
    }
  }

  episode.discounted_return = integrate_discounted_return(episode, model.discount);
  return episode;
}

double integrate_discounted_return(const Episode& episode, double discount) {
  if (!(discount > 0.0))
    throw std::invalid_argument("integrate_discounted_return: discount <= 0");
  double total = 0.0;
  for (std::size_t i = 1; i < episode.grid.size(); ++i) {
    const auto& a = episode.grid[i - 1];
    const auto& b = episode.grid[i];
    const double width = b.t - a.t;
    if (width <= 0.0) continue;
    const double wa = std::exp(-a.t / discount) / discount;
    const double wb = std::exp(-b.t / discount) / discount;
    total += 0.5 * (wa * a.reward + wb * b.reward) * width;
  }
  return total;
}

std::string episode_to_csv(const Episode& episode) {
  std::ostringstream os;
  const int n = episode.grid.empty() ? 0 : episode.grid.front().belief.size();
  os << "#meta,horizon=" << format_double(episode.horizon)
     << ",seed=" << episode.seed
     << ",discounted_return=" << format_double(episode.discounted_return)
     << ",num_states=" << n << "\n";
  os << "t,event_type,x,u,y,reward";
  for (int i = 0; i < n; ++i) os << ",belief_" << i;
  os << "\n";

  auto write_belief = [&](const Belief& b) {
    for (int i = 0; i < b.size(); ++i) os << "," << format_double(b[i]);
  };
  std::size_t next_event = 0;
  for (std::size_t i = 0; i < episode.grid.size(); ++i) {
    const auto& s = episode.grid[i];
    os << format_double(s.t) << ",sample," << s.x << "," << s.u << ",-1,"
       << format_double(s.reward);
    write_belief(s.belief);
    os << "\n";
    while (next_event < episode.events.size() &&
           episode.events[next_event].grid_index == static_cast<int>(i)) {
      const auto& ev = episode.events[next_event];
      os << format_double(ev.t) << "," << kind_name(ev.kind) << "," << ev.x_to
         << "," << ev.u << "," << ev.y << ","
         << format_double(0.0);
      write_belief(ev.belief_after);
      os << "\n";
      ++next_event;
    }
  }
  return os.str();
}

Episode episode_from_csv(const std::string& text) {
  Episode episode;
  std::istringstream is(text);
  std::string line;
  int num_states = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line.rfind("#meta", 0) == 0) {
      std::istringstream meta(line);
      std::string field;
      while (std::getline(meta, field, ',')) {
        auto eq = field.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = field.substr(0, eq);
        const std::string value = field.substr(eq + 1);
        if (key == "horizon") episode.horizon = std::strtod(value.c_str(), nullptr);
        if (key == "seed") episode.seed = std::strtoull(value.c_str(), nullptr, 10);
        if (key == "discounted_return")
          episode.discounted_return = std::strtod(value.c_str(), nullptr);
        if (key == "num_states") num_states = std::atoi(value.c_str());
      }
      continue;
    }
    if (!header_seen) {  // column header line
      header_seen = true;
      continue;
    }
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != static_cast<std::size_t>(6 + num_states))
      throw std::invalid_argument("episode_from_csv: malformed row");
    const double t = std::strtod(fields[0].c_str(), nullptr);
    const std::string& type = fields[1];
    const int x = std::atoi(fields[2].c_str());
    const int u = std::atoi(fields[3].c_str());
    const int y = std::atoi(fields[4].c_str());
    const double reward = std::strtod(fields[5].c_str(), nullptr);
    Belief belief(num_states);
    for (int i = 0; i < num_states; ++i)
      belief[i] = std::strtod(fields[static_cast<std::size_t>(6 + i)].c_str(), nullptr);
    if (type == "sample") {
      episode.grid.push_back({t, x, u, reward, std::move(belief)});
    } else {
      EventRecord ev;
      ev.t = t;
      ev.kind = kind_from_name(type);
      ev.u = u;
      ev.y = y;
      ev.x_to = x;
      ev.grid_index = static_cast<int>(episode.grid.size()) - 1;
      if (episode.grid.empty())
        throw std::invalid_argument("episode_from_csv: event before any sample");
      const auto& prev = episode.grid.back();
      ev.x_from = ev.kind == EventKind::kJump ? prev.x : x;
      ev.belief_after = std::move(belief);
      // Jumps and resets follow their inserted same-time pre-event sample;
      // action changes leave the belief untouched.
      ev.belief_before = ev.kind == EventKind::kActionChange ? ev.belief_after
                                                             : prev.belief;
      episode.events.push_back(std::move(ev));
    }
  }
  return episode;
}

namespace {

nlohmann::json belief_to_json(const Belief& b) { return b.p; }

Belief belief_from_json(const nlohmann::json& j) {
  return Belief(j.get<std::vector<double>>());
}

}  // namespace

std::string episode_to_json(const Episode& episode) {
  nlohmann::json j;
  j["horizon"] = episode.horizon;
  j["seed"] = episode.seed;
  j["discounted_return"] = episode.discounted_return;
  j["grid"] = nlohmann::json::array();
  for (const auto& s : episode.grid) {
    j["grid"].push_back({{"t", s.t},
                         {"x", s.x},
                         {"u", s.u},
                         {"reward", s.reward},
                         {"belief", belief_to_json(s.belief)}});
  }
  j["events"] = nlohmann::json::array();
  for (const auto& ev : episode.events) {
    j["events"].push_back({{"t", ev.t},
                           {"kind", kind_name(ev.kind)},
                           {"x_from", ev.x_from},
                           {"x_to", ev.x_to},
                           {"u", ev.u},
                           {"y", ev.y},
                           {"belief_before", belief_to_json(ev.belief_before)},
                           {"belief_after", belief_to_json(ev.belief_after)},
                           {"grid_index", ev.grid_index}});
  }
  return j.dump();
}

Episode episode_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  Episode episode;
  episode.horizon = j.at("horizon").get<double>();
  episode.seed = j.at("seed").get<std::uint64_t>();
  episode.discounted_return = j.at("discounted_return").get<double>();
  for (const auto& js : j.at("grid")) {
    episode.grid.push_back({js.at("t").get<double>(), js.at("x").get<int>(),
                            js.at("u").get<int>(), js.at("reward").get<double>(),
                            belief_from_json(js.at("belief"))});
  }
  for (const auto& je : j.at("events")) {
    EventRecord ev;
    ev.t = je.at("t").get<double>();
    ev.kind = kind_from_name(je.at("kind").get<std::string>());
    ev.x_from = je.at("x_from").get<int>();
    ev.x_to = je.at("x_to").get<int>();
    ev.u = je.at("u").get<int>();
    ev.y = je.at("y").get<int>();
    ev.belief_before = belief_from_json(je.at("belief_before"));
    ev.belief_after = belief_from_json(je.at("belief_after"));
    ev.grid_index = je.at("grid_index").get<int>();
    episode.events.push_back(std::move(ev));
  }
  return episode;
}

}  // namespace ctpomdp::sim
