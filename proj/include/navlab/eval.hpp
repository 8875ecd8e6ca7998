// Copyright 2026 The navlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <memory>
#include <string>
#include <vector>

#include "navlab/train.hpp"

namespace navlab {

// Frozen set of scenarios; every policy under comparison runs the same cases.
struct TestSuite {
  std::string id;
  std::vector<ScenarioSpec> scenarios;
  std::uint64_t generation_seed = 0;
};

inline TestSuite generate_test_suite(std::size_t n_agents, std::size_t n_cases,
                                     double domain_size, std::uint64_t seed,
                                     std::string id = "") {
  TestSuite suite;
  suite.generation_seed = seed;
  suite.id = id.empty() ? "n" + std::to_string(n_agents) + "_d" +
                              std::to_string(static_cast<int>(domain_size)) + "_s" +
                              std::to_string(seed)
                        : std::move(id);
  std::mt19937_64 rng(seed);
  while (suite.scenarios.size() < n_cases) {
    try {
      ScenarioSpec spec = generate_random_scenario(n_agents, domain_size, rng);
      spec.rng_seed = rng();
      suite.scenarios.push_back(std::move(spec));
    } catch (const std::runtime_error&) {
      // crowded draw, retry
    }
  }
  return suite;
}

// Arrival time beyond the straight-line time at preferred speed.
inline double extra_time_to_goal(const EpisodeLog& log, std::size_t agent_id) {
  const AgentOutcome& outcome = log.outcomes.at(agent_id);
  if (outcome.status != AgentStatus::AtGoal)
    throw std::invalid_argument("extra_time_to_goal: agent did not reach its goal");
  const AgentSpec& spec = log.scenario.agents.at(agent_id);
  const double straight = (spec.goal - spec.start).norm() / spec.v_pref;
  return outcome.arrival_time - straight;
}

struct CaseOutcome {
  bool collision = false;
  bool stuck = false;
  bool success = false;
  std::vector<double> extra_times;  // one entry per agent that reached its goal
};

struct PolicyOutcomes {
  std::string policy_name;
  std::string suite_id;
  std::vector<CaseOutcome> cases;
};

// The evaluated policy runs on every agent in the world (homogeneous worlds).
struct EvalPolicy {
  std::string name;
  PolicyTag tag = PolicyTag::Learned;
  std::shared_ptr<const NetParams<float>> params;  // required when tag == Learned
};

inline EvalPolicy baseline_eval_policy(PolicyTag tag) {
  if (tag == PolicyTag::Learned || tag == PolicyTag::Scripted)
    throw std::invalid_argument("baseline_eval_policy: expected a baseline tag");
  return {to_string(tag), tag, nullptr};
}

inline PolicyOutcomes evaluate(const EvalPolicy& policy, const TestSuite& suite,
                               const ObsConfig& obs_cfg = {}) {
  if (policy.tag == PolicyTag::Learned && !policy.params)
    throw std::invalid_argument("evaluate: learned policy needs parameters");
  if (policy.params &&
      policy.params->config.action_count != static_cast<int>(kActionCount))
    throw std::invalid_argument("evaluate: checkpoint action count incompatible");

  PolicyOutcomes out;
  out.policy_name = policy.name;
  out.suite_id = suite.id;
  PolicyTable table;
  if (policy.tag == PolicyTag::Learned) {
    LearnedPolicy<float> lp;
    lp.params = policy.params;
    lp.mode = ActionMode::Greedy;
    lp.obs_config = obs_cfg;
    table.learned = lp;
  }

  for (const ScenarioSpec& base : suite.scenarios) {
    ScenarioSpec spec = base;
    for (AgentSpec& a : spec.agents) a.policy_tag = policy.tag;
    EpisodeOptions opt;
    opt.obs_config = obs_cfg;
    EpisodeResult er = run_episode(spec, table, opt);

    CaseOutcome c;
    bool all_at_goal = true;
    for (std::size_t i = 0; i < er.log.outcomes.size(); ++i) {
      const AgentStatus s = er.log.outcomes[i].status;
      if (s == AgentStatus::Collided) c.collision = true;
      if (s == AgentStatus::TimedOut) c.stuck = true;
      if (s != AgentStatus::AtGoal)
        all_at_goal = false;
      else
        c.extra_times.push_back(extra_time_to_goal(er.log, i));
    }
    if (c.collision) c.stuck = false;  // collision takes attribution precedence
    c.success = all_at_goal;
    out.cases.push_back(std::move(c));
  }
  return out;
}

struct Metrics {
  std::string policy_name;
  double pct_collisions = 0.0;
  double pct_stuck = 0.0;
  double extra_time_mean = 0.0;
  double extra_time_p75 = 0.0;
  double extra_time_p90 = 0.0;
  std::size_t timing_case_count = 0;  // mutually-successful cases
};

// Nearest-rank percentile on the sorted sample.
inline double nearest_rank_percentile(std::vector<double> sample, double pct) {
  if (sample.empty()) return 0.0;
  std::sort(sample.begin(), sample.end());
  const std::size_t rank = static_cast<std::size_t>(
      std::ceil(pct / 100.0 * static_cast<double>(sample.size())));
  return sample[std::min(sample.size() - 1, rank == 0 ? 0 : rank - 1)];
}

// Failure percentages over all cases; timing statistics restricted to the
// cases every compared policy completed without failure.
inline std::vector<Metrics> compare(const std::vector<PolicyOutcomes>& outcomes) {
  if (outcomes.empty()) throw std::invalid_argument("compare: nothing to compare");
  const std::size_t n_cases = outcomes.front().cases.size();
  for (const PolicyOutcomes& po : outcomes) {
    if (po.suite_id != outcomes.front().suite_id)
      throw std::invalid_argument("compare: suite id mismatch");
    if (po.cases.size() != n_cases)
      throw std::invalid_argument("compare: case count mismatch");
  }
  std::vector<bool> mutual(n_cases, true);
  for (const PolicyOutcomes& po : outcomes)
    for (std::size_t i = 0; i < n_cases; ++i)
      if (!po.cases[i].success) mutual[i] = false;

  std::vector<Metrics> result;
  for (const PolicyOutcomes& po : outcomes) {
    Metrics m;
    m.policy_name = po.policy_name;
    std::size_t collisions = 0, stuck = 0;
    std::vector<double> times;
    for (std::size_t i = 0; i < n_cases; ++i) {
      if (po.cases[i].collision) ++collisions;
      if (po.cases[i].stuck) ++stuck;
      if (mutual[i])
        times.insert(times.end(), po.cases[i].extra_times.begin(),
                     po.cases[i].extra_times.end());
    }
    if (n_cases > 0) {
      m.pct_collisions = 100.0 * static_cast<double>(collisions) / n_cases;
      m.pct_stuck = 100.0 * static_cast<double>(stuck) / n_cases;
    }
    m.timing_case_count = static_cast<std::size_t>(
        std::count(mutual.begin(), mutual.end(), true));
    if (!times.empty()) {
      double sum = 0.0;
      for (double t : times) sum += t;
      m.extra_time_mean = sum / static_cast<double>(times.size());
      m.extra_time_p75 = nearest_rank_percentile(times, 75.0);
      m.extra_time_p90 = nearest_rank_percentile(times, 90.0);
    }
    result.push_back(std::move(m));
  }
  return result;
}

}  // namespace navlab
