// Copyright 2026 The navlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "navlab/training_run.hpp"

namespace navlab {

// Every tunable in one place: network shape, observation options, simulator
// timestep, reward constants, and the training schedule. All keys optional.
struct RunSettings {
  NetConfig net;
  ObsConfig obs;
  RewardParams reward;
  TrainingConfig train;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

struct KeyBinding {
  std::function<void(RunSettings&, const std::string&)> set;
  std::function<std::string(const RunSettings&)> get;
};

template <typename T>
T parse_value(const std::string& v);

template <>
inline double parse_value<double>(const std::string& v) {
  std::size_t pos = 0;
  const double d = std::stod(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("bad number: " + v);
  return d;
}
template <>
inline int parse_value<int>(const std::string& v) {
  std::size_t pos = 0;
  const int i = std::stoi(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("bad integer: " + v);
  return i;
}
template <>
inline std::uint64_t parse_value<std::uint64_t>(const std::string& v) {
  std::size_t pos = 0;
  const unsigned long long i = std::stoull(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("bad integer: " + v);
  return i;
}
template <>
inline bool parse_value<bool>(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("bad boolean: " + v);
}

template <typename T>
std::string render_value(const T& v) {
  if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
  if constexpr (std::is_same_v<T, double>) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
  }
  return std::to_string(v);
}

template <typename T, typename Accessor>
KeyBinding make_binding(Accessor access) {
  return KeyBinding{
      [access](RunSettings& s, const std::string& v) { *access(s) = parse_value<T>(v); },
      [access](const RunSettings& s) {
        return render_value(*access(const_cast<RunSettings&>(s)));
      }};
}

inline const std::map<std::string, KeyBinding>& key_table() {
  static const std::map<std::string, KeyBinding> table = [] {
    std::map<std::string, KeyBinding> t;
    auto add = [&](const std::string& key, KeyBinding b) { t.emplace(key, std::move(b)); };
#define NAVLAB_KEY(name, type, expr) \
  add(name, make_binding<type>(+[](RunSettings& s) -> type* { return &(expr); }))
    NAVLAB_KEY("net.lstm_hidden", int, s.net.lstm_hidden);
    NAVLAB_KEY("net.fc1_width", int, s.net.fc1_width);
    NAVLAB_KEY("net.fc2_width", int, s.net.fc2_width);
    NAVLAB_KEY("net.max_sequence", int, s.net.max_sequence);
    NAVLAB_KEY("obs.sensing_radius", double, s.obs.sensing_radius);
    NAVLAB_KEY("obs.max_others", std::size_t, s.obs.max_others);
    NAVLAB_KEY("sim.dt", double, s.train.dt);
    NAVLAB_KEY("reward.goal", double, s.reward.goal_reward);
    NAVLAB_KEY("reward.collision", double, s.reward.collision_penalty);
    NAVLAB_KEY("reward.proximity_threshold", double, s.reward.proximity_threshold);
    NAVLAB_KEY("reward.proximity_offset", double, s.reward.proximity_offset);
    NAVLAB_KEY("reward.proximity_slope", double, s.reward.proximity_slope);
    NAVLAB_KEY("train.gamma", double, s.train.gamma);
    NAVLAB_KEY("train.entropy_beta", double, s.train.entropy_beta);
    NAVLAB_KEY("train.lr", double, s.train.lr);
    NAVLAB_KEY("train.batch_size", int, s.train.batch_size);
    NAVLAB_KEY("train.k_horizon", int, s.train.k_horizon);
    NAVLAB_KEY("train.phase1_min_agents", int, s.train.phase1_min_agents);
    NAVLAB_KEY("train.phase1_max_agents", int, s.train.phase1_max_agents);
    NAVLAB_KEY("train.phase2_min_agents", int, s.train.phase2_min_agents);
    NAVLAB_KEY("train.phase2_max_agents", int, s.train.phase2_max_agents);
    NAVLAB_KEY("train.phase1_episodes", std::uint64_t, s.train.phase1_episodes);
    NAVLAB_KEY("train.phase2_episodes", std::uint64_t, s.train.phase2_episodes);
    NAVLAB_KEY("train.domain_small", double, s.train.domain_small);
    NAVLAB_KEY("train.domain_large", double, s.train.domain_large);
    NAVLAB_KEY("train.large_domain_from", int, s.train.large_domain_from);
    NAVLAB_KEY("train.workers", int, s.train.workers);
    NAVLAB_KEY("train.queue_capacity", int, s.train.queue_capacity);
    NAVLAB_KEY("train.p_learned", double, s.train.p_learned);
    NAVLAB_KEY("train.p_noncoop", double, s.train.p_noncoop);
    NAVLAB_KEY("train.p_zerovel", double, s.train.p_zerovel);
    NAVLAB_KEY("train.grad_clip", double, s.train.grad_clip);
    NAVLAB_KEY("train.vpref_scaled_discount", bool, s.train.vpref_scaled_discount);
    NAVLAB_KEY("train.checkpoint_every", std::uint64_t, s.train.checkpoint_every);
    NAVLAB_KEY("train.plateau_delta", double, s.train.plateau_delta);
    NAVLAB_KEY("train.plateau_window", std::uint64_t, s.train.plateau_window);
    NAVLAB_KEY("train.supervised_lr", double, s.train.supervised_lr);
    NAVLAB_KEY("train.supervised_epochs", int, s.train.supervised_epochs);
    NAVLAB_KEY("train.supervised_examples", std::size_t, s.train.supervised_examples);
#undef NAVLAB_KEY
    return t;
  }();
  return table;
}

}  // namespace detail

inline std::string valid_config_keys() {
  std::string out;
  for (const auto& [k, unused] : detail::key_table()) {
    out += "  " + k + "\n";
  }
  return out;
}

inline void apply_config_entry(RunSettings& settings, const std::string& key,
                               const std::string& value) {
  const auto& table = detail::key_table();
  auto it = table.find(key);
  if (it == table.end())
    throw std::invalid_argument("unknown config key '" + key + "'; valid keys:\n" +
                                valid_config_keys());
  it->second.set(settings, value);
}

// INI-style flat file: [section] headers, key = value lines, '#' comments.
inline void load_config_file(RunSettings& settings, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file: " + path);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": expected key = value");
    std::string key = detail::trim(line.substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    apply_config_entry(settings, key, detail::trim(line.substr(eq + 1)));
  }
}

// key=value pairs from the command line.
inline void apply_overrides(RunSettings& settings, const std::vector<std::string>& overrides) {
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("override must look like key=value: " + kv);
    apply_config_entry(settings, detail::trim(kv.substr(0, eq)),
                       detail::trim(kv.substr(eq + 1)));
  }
}

// Echo the effective merged configuration; feeding the echoed file back
// reproduces the run.
inline void write_effective_config(const RunSettings& settings, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write effective config: " + path);
  std::string section;
  for (const auto& [key, binding] : detail::key_table()) {
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      os << (section.empty() ? "" : "\n") << "[" << sec << "]\n";
      section = sec;
    }
    os << key.substr(dot + 1) << " = " << binding.get(settings) << "\n";
  }
}

}  // namespace navlab
