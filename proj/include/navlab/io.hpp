// Copyright 2026 The navlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include <json.hpp>

#include "navlab/eval.hpp"
#include "navlab/sim.hpp"

namespace navlab {

using nlohmann::json;

inline json to_json(const AgentSpec& a) {
  return json{{"start", {a.start.x, a.start.y}},
              {"goal", {a.goal.x, a.goal.y}},
              {"radius", a.radius},
              {"v_pref", a.v_pref},
              {"policy", to_string(a.policy_tag)}};
}

inline AgentSpec agent_spec_from_json(const json& j) {
  AgentSpec a;
  a.start = {j.at("start").at(0).get<double>(), j.at("start").at(1).get<double>()};
  a.goal = {j.at("goal").at(0).get<double>(), j.at("goal").at(1).get<double>()};
  a.radius = j.at("radius").get<double>();
  a.v_pref = j.at("v_pref").get<double>();
  a.policy_tag = policy_tag_from_string(j.at("policy").get<std::string>());
  return a;
}

inline json to_json(const ScenarioSpec& s) {
  json agents = json::array();
  for (const AgentSpec& a : s.agents) agents.push_back(to_json(a));
  return json{{"agents", agents},       {"domain_size", s.domain_size},
              {"rng_seed", s.rng_seed}, {"dt", s.dt},
              {"time_limit", s.time_limit}};
}

inline ScenarioSpec scenario_from_json(const json& j) {
  ScenarioSpec s;
  for (const json& a : j.at("agents")) s.agents.push_back(agent_spec_from_json(a));
  s.domain_size = j.at("domain_size").get<double>();
  s.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  s.dt = j.at("dt").get<double>();
  s.time_limit = j.at("time_limit").get<double>();
  return s;
}

// Suite file: versioned JSON with one array of scenario objects.
inline void save_suite(const TestSuite& suite, const std::string& path) {
  json j{{"format", 1},
         {"id", suite.id},
         {"generation_seed", suite.generation_seed},
         {"scenarios", json::array()}};
  for (const ScenarioSpec& s : suite.scenarios) j["scenarios"].push_back(to_json(s));
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write suite: " + path);
  os << j.dump(2) << "\n";
}

inline TestSuite load_suite(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open suite: " + path);
  json j = json::parse(is);
  if (j.at("format").get<int>() != 1)
    throw std::runtime_error("unsupported suite format in " + path);
  TestSuite suite;
  suite.id = j.at("id").get<std::string>();
  suite.generation_seed = j.at("generation_seed").get<std::uint64_t>();
  for (const json& s : j.at("scenarios")) suite.scenarios.push_back(scenario_from_json(s));
  return suite;
}

// Episode log JSON: metadata header plus a per-step array of agent states.
inline json to_json(const EpisodeLog& log) {
  json steps = json::array();
  for (const auto& snapshot : log.snapshots) {
    json agents = json::array();
    for (const AgentState& a : snapshot) {
      agents.push_back(json{{"px", a.position.x},
                            {"py", a.position.y},
                            {"vx", a.velocity.x},
                            {"vy", a.velocity.y},
                            {"psi", a.heading},
                            {"status", to_string(a.status)}});
    }
    steps.push_back(std::move(agents));
  }
  json outcomes = json::array();
  for (const AgentOutcome& o : log.outcomes) {
    outcomes.push_back(json{{"status", to_string(o.status)},
                            {"arrival_time", o.arrival_time},
                            {"cumulative_reward", o.cumulative_reward}});
  }
  json j{{"format", 1},
         {"scenario", to_json(log.scenario)},
         {"dt", log.scenario.dt},
         {"outcomes", outcomes},
         {"steps", steps}};
  if (!log.distributions.empty()) {
    json dists = json::array();
    for (const auto& step : log.distributions) dists.push_back(step);
    j["policy_distributions"] = std::move(dists);
  }
  return j;
}

inline void save_episode_json(const EpisodeLog& log, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write episode log: " + path);
  os << to_json(log).dump(2) << "\n";
}

// Flat CSV: one row per agent per step.
inline void save_episode_csv(const EpisodeLog& log, const std::string& path,
                             std::uint64_t episode_id = 0) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write episode csv: " + path);
  os << "episode_id,t,agent_id,px,py,vx,vy,psi,status\n";
  char buf[256];
  for (std::size_t s = 0; s < log.snapshots.size(); ++s) {
    const double t = static_cast<double>(s) * log.scenario.dt;
    for (std::size_t i = 0; i < log.snapshots[s].size(); ++i) {
      const AgentState& a = log.snapshots[s][i];
      std::snprintf(buf, sizeof(buf), "%llu,%.3f,%zu,%.9f,%.9f,%.9f,%.9f,%.9f,%s\n",
                    static_cast<unsigned long long>(episode_id), t, i, a.position.x,
                    a.position.y, a.velocity.x, a.velocity.y, a.heading,
                    to_string(a.status).c_str());
      os << buf;
    }
  }
}

// Per-case outcome files, for later cross-policy joins.
inline void save_outcomes(const PolicyOutcomes& outcomes, const std::string& path) {
  json cases = json::array();
  for (const CaseOutcome& c : outcomes.cases) {
    cases.push_back(json{{"collision", c.collision},
                         {"stuck", c.stuck},
                         {"success", c.success},
                         {"extra_times", c.extra_times}});
  }
  json j{{"format", 1},
         {"policy", outcomes.policy_name},
         {"suite_id", outcomes.suite_id},
         {"cases", cases}};
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write outcomes: " + path);
  os << j.dump(2) << "\n";
}

inline PolicyOutcomes load_outcomes(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open outcomes: " + path);
  json j = json::parse(is);
  PolicyOutcomes out;
  out.policy_name = j.at("policy").get<std::string>();
  out.suite_id = j.at("suite_id").get<std::string>();
  for (const json& c : j.at("cases")) {
    CaseOutcome co;
    co.collision = c.at("collision").get<bool>();
    co.stuck = c.at("stuck").get<bool>();
    co.success = c.at("success").get<bool>();
    co.extra_times = c.at("extra_times").get<std::vector<double>>();
    out.cases.push_back(std::move(co));
  }
  return out;
}

// Supervised dataset: small binary format (magic, count, then per example the
// ego vector, the others sequence, the target action and value, as float64).
inline void save_dataset(const std::vector<SupervisedExample>& dataset,
                         const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write dataset: " + path);
  os.write("NVLD", 4);
  const std::uint32_t version = 1;
  os.write(reinterpret_cast<const char*>(&version), sizeof(version));
  const std::uint64_t count = dataset.size();
  os.write(reinterpret_cast<const char*>(&count), sizeof(count));
  auto wd = [&](double v) { os.write(reinterpret_cast<const char*>(&v), sizeof(v)); };
  for (const SupervisedExample& ex : dataset) {
    const EgoObservation& e = ex.observation.ego;
    wd(e.dist_to_goal);
    wd(e.v_pref);
    wd(e.heading_ego);
    wd(e.radius);
    const std::uint32_t n = static_cast<std::uint32_t>(ex.observation.others.size());
    os.write(reinterpret_cast<const char*>(&n), sizeof(n));
    for (const OtherObservation& o : ex.observation.others) {
      wd(o.px);
      wd(o.py);
      wd(o.vx);
      wd(o.vy);
      wd(o.radius);
      wd(o.dist_to_agent);
      wd(o.combined_radius);
    }
    const std::int32_t a = ex.target_action_index;
    os.write(reinterpret_cast<const char*>(&a), sizeof(a));
    wd(ex.target_value);
  }
}

inline std::vector<SupervisedExample> load_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open dataset: " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::string(magic, 4) != "NVLD")
    throw std::runtime_error("not a dataset file: " + path);
  std::uint32_t version = 0;
  is.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (version != 1) throw std::runtime_error("unsupported dataset version");
  std::uint64_t count = 0;
  is.read(reinterpret_cast<char*>(&count), sizeof(count));
  auto rd = [&] {
    double v = 0;
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(v)))
      throw std::runtime_error("dataset truncated");
    return v;
  };
  std::vector<SupervisedExample> dataset;
  dataset.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    SupervisedExample ex;
    ex.observation.ego.dist_to_goal = rd();
    ex.observation.ego.v_pref = rd();
    ex.observation.ego.heading_ego = rd();
    ex.observation.ego.radius = rd();
    std::uint32_t n = 0;
    if (!is.read(reinterpret_cast<char*>(&n), sizeof(n)))
      throw std::runtime_error("dataset truncated");
    for (std::uint32_t k = 0; k < n; ++k) {
      OtherObservation o;
      o.px = rd();
      o.py = rd();
      o.vx = rd();
      o.vy = rd();
      o.radius = rd();
      o.dist_to_agent = rd();
      o.combined_radius = rd();
      ex.observation.others.push_back(o);
    }
    std::int32_t a = 0;
    if (!is.read(reinterpret_cast<char*>(&a), sizeof(a)))
      throw std::runtime_error("dataset truncated");
    ex.target_action_index = a;
    ex.target_value = rd();
    dataset.push_back(std::move(ex));
  }
  return dataset;
}

inline void save_report_csv(const std::vector<Metrics>& metrics, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write report: " + path);
  os << "policy,extra_time_mean_s,extra_time_p75_s,extra_time_p90_s,"
        "pct_collisions,pct_stuck,timing_case_count\n";
  for (const Metrics& m : metrics) {
    os << m.policy_name << "," << std::fixed << std::setprecision(3) << m.extra_time_mean
       << "," << m.extra_time_p75 << "," << m.extra_time_p90 << "," << std::setprecision(1)
       << m.pct_collisions << "," << m.pct_stuck << "," << m.timing_case_count << "\n";
  }
}

inline std::string format_report_table(const std::vector<Metrics>& metrics) {
  std::ostringstream os;
  os << std::left << std::setw(20) << "policy" << std::right << std::setw(22)
     << "extra time (avg/75/90)" << std::setw(26) << "% failures (coll / stuck)"
     << std::setw(10) << "timed on" << "\n";
  for (const Metrics& m : metrics) {
    std::ostringstream times, fails;
    times << std::fixed << std::setprecision(2) << m.extra_time_mean << " / "
          << m.extra_time_p75 << " / " << m.extra_time_p90;
    fails << std::fixed << std::setprecision(1) << (m.pct_collisions + m.pct_stuck) << " ("
          << m.pct_collisions << " / " << m.pct_stuck << ")";
    os << std::left << std::setw(20) << m.policy_name << std::right << std::setw(22)
       << times.str() << std::setw(26) << fails.str() << std::setw(10)
       << m.timing_case_count << "\n";
  }
  return os.str();
}

}  // namespace navlab
