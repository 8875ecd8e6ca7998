// Copyright 2026 The navlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "navlab/agent.hpp"
#include "navlab/obs.hpp"
#include "navlab/scenario.hpp"

namespace navlab {

// Arrival tolerance: the goal must be reachable within one decision step.
inline double arrival_tolerance(const AgentState& a, double dt) {
  return std::max(0.1, a.v_pref * dt);
}

struct StepEvents {
  std::vector<std::size_t> reached_goal;
  std::vector<std::size_t> collided;
  std::vector<std::size_t> timed_out;
};

// Forward-Euler step. Heading integrates the commanded change, then the agent
// moves along the new heading. Collided and AtGoal agents are frozen and
// excluded from collision checks; TimedOut agents stay as obstacles.
inline StepEvents step(std::vector<AgentState>& world,
                       const std::vector<std::optional<Action>>& actions, double dt,
                       const std::vector<double>& time_limits = {}) {
  if (dt <= 0.0) throw std::invalid_argument("step: dt must be positive");
  if (actions.size() != world.size())
    throw std::invalid_argument("step: one action slot per agent required");

  StepEvents events;
  for (std::size_t i = 0; i < world.size(); ++i) {
    AgentState& a = world[i];
    if (!a.active()) continue;
    if (!actions[i].has_value()) throw std::invalid_argument("step: active agent has no action");
    const Action& u = *actions[i];
    a.heading = wrap_angle(a.heading + u.heading_change);
    a.velocity = {u.speed * std::cos(a.heading), u.speed * std::sin(a.heading)};
    a.position += dt * a.velocity;
    a.elapsed += dt;
  }

  // Collision pass over post-move positions.
  for (std::size_t i = 0; i < world.size(); ++i) {
    if (!world[i].active()) continue;
    for (std::size_t j = 0; j < world.size(); ++j) {
      if (j == i) continue;
      const AgentStatus sj = world[j].status;
      if (sj == AgentStatus::Collided || sj == AgentStatus::AtGoal) continue;
      if (surface_distance(world[i], world[j]) < 0.0) {
        events.collided.push_back(i);
        break;
      }
    }
  }
  for (std::size_t i : events.collided) {
    world[i].status = AgentStatus::Collided;
    world[i].velocity = {0.0, 0.0};
  }

  for (std::size_t i = 0; i < world.size(); ++i) {
    AgentState& a = world[i];
    if (!a.active()) continue;
    if (a.distance_to_goal() <= arrival_tolerance(a, dt)) {
      a.status = AgentStatus::AtGoal;
      a.velocity = {0.0, 0.0};
      events.reached_goal.push_back(i);
    } else if (!time_limits.empty() && a.elapsed > time_limits[i]) {
      a.status = AgentStatus::TimedOut;
      a.velocity = {0.0, 0.0};
      events.timed_out.push_back(i);
    }
  }
  return events;
}

// A policy's per-step output. Baselines leave action_index at -1; learned
// policies report the chosen discrete index (and optionally the distribution).
struct PolicyDecision {
  Action action;
  int action_index = -1;
  std::vector<double> distribution;
};

using PolicyFn = std::function<PolicyDecision(const std::vector<AgentState>& world,
                                              std::size_t ego, std::mt19937_64& rng)>;

inline PolicyDecision zero_velocity_policy(const std::vector<AgentState>&, std::size_t,
                                           std::mt19937_64&) {
  return {Action{0.0, 0.0}, -1, {}};
}

// Straight to the goal at preferred speed, turning at most pi/6 per step.
inline PolicyDecision non_cooperative_policy(const std::vector<AgentState>& world,
                                             std::size_t ego, std::mt19937_64&) {
  const AgentState& a = world[ego];
  const Vec2 to_goal = a.goal - a.position;
  const double bearing = std::atan2(to_goal.y, to_goal.x);
  const double turn = clamp(wrap_angle(bearing - a.heading), -kPi / 6.0, kPi / 6.0);
  return {Action{a.v_pref, turn}, -1, {}};
}

struct PolicyTable {
  PolicyFn learned;
  PolicyFn scripted;
  PolicyFn non_cooperative = non_cooperative_policy;
  PolicyFn zero_velocity = zero_velocity_policy;

  const PolicyFn& for_tag(PolicyTag tag) const {
    switch (tag) {
      case PolicyTag::Learned:
        if (!learned) throw std::runtime_error("no learned policy installed");
        return learned;
      case PolicyTag::Scripted:
        if (!scripted) throw std::runtime_error("no scripted policy installed");
        return scripted;
      case PolicyTag::NonCooperative: return non_cooperative;
      case PolicyTag::ZeroVelocity: return zero_velocity;
    }
    throw std::logic_error("unknown policy tag");
  }
};

struct AgentOutcome {
  AgentStatus status = AgentStatus::Active;
  double arrival_time = -1.0;  // valid when status == AtGoal
  double cumulative_reward = 0.0;
};

struct EpisodeLog {
  ScenarioSpec scenario;
  std::vector<std::vector<AgentState>> snapshots;  // includes t = 0
  std::vector<AgentOutcome> outcomes;
  // Per-step learned-policy distributions, recorded when requested:
  // distributions[step][agent] (empty vector when not applicable).
  std::vector<std::vector<std::vector<double>>> distributions;
};

// One training tuple harvested from a learned-policy agent.
struct Experience {
  ObservationSequence observation;
  int action_index = 0;
  double reward = 0.0;
  bool terminal = false;
  std::uint64_t episode_id = 0;
  std::uint32_t agent_id = 0;
  std::uint32_t step_index = 0;
};

struct EpisodeResult {
  EpisodeLog log;
  // One trajectory (time-ordered experiences) per learned agent.
  std::vector<std::vector<Experience>> trajectories;
};

struct EpisodeOptions {
  RewardParams reward_params;
  ObsConfig obs_config;
  bool collect_experiences = false;
  bool record_distributions = false;
  std::uint64_t episode_id = 0;
};

// Observe -> act -> step loop until every agent is non-Active. Deterministic
// given the scenario seed and policy table behavior: one RNG stream, consumed
// in ascending agent order each step.
inline EpisodeResult run_episode(const ScenarioSpec& spec, const PolicyTable& policies,
                                 const EpisodeOptions& opt = {}) {
  validate_scenario(spec);
  std::vector<AgentState> world = make_world(spec);
  std::vector<double> limits;
  limits.reserve(spec.agents.size());
  for (const AgentSpec& a : spec.agents) limits.push_back(agent_time_limit(spec, a));

  std::mt19937_64 rng(spec.rng_seed);
  EpisodeResult result;
  result.log.scenario = spec;
  result.log.snapshots.push_back(world);
  result.log.outcomes.resize(world.size());
  result.trajectories.resize(world.size());

  std::vector<std::uint32_t> step_counts(world.size(), 0);
  bool any_active = true;
  while (any_active) {
    std::vector<std::optional<Action>> actions(world.size());
    std::vector<std::optional<ObservationSequence>> taken_obs(world.size());
    std::vector<int> taken_index(world.size(), -1);
    std::vector<std::vector<double>> step_dists(world.size());
    for (std::size_t i = 0; i < world.size(); ++i) {
      if (!world[i].active()) continue;
      if (opt.collect_experiences && world[i].policy_tag == PolicyTag::Learned)
        taken_obs[i] = build_observation(world, i, opt.obs_config);
      PolicyDecision d = policies.for_tag(world[i].policy_tag)(world, i, rng);
      actions[i] = d.action;
      taken_index[i] = d.action_index;
      if (opt.record_distributions) step_dists[i] = std::move(d.distribution);
    }

    std::vector<bool> was_active(world.size());
    std::vector<bool> was_eligible(world.size());
    for (std::size_t i = 0; i < world.size(); ++i) {
      was_active[i] = world[i].active();
      was_eligible[i] = world[i].status != AgentStatus::Collided &&
                        world[i].status != AgentStatus::AtGoal;
    }
    StepEvents events = step(world, actions, spec.dt, limits);

    for (std::size_t i = 0; i < world.size(); ++i) {
      if (!was_active[i]) continue;
      std::vector<AgentState> others;
      for (std::size_t j = 0; j < world.size(); ++j)
        if (j != i && was_eligible[j]) others.push_back(world[j]);
      const bool reached = world[i].status == AgentStatus::AtGoal;
      const double r = reward(world[i], others, reached, opt.reward_params);
      result.log.outcomes[i].cumulative_reward += r;
      if (opt.collect_experiences && world[i].policy_tag == PolicyTag::Learned &&
          taken_obs[i].has_value()) {
        Experience e;
        e.observation = std::move(*taken_obs[i]);
        e.action_index = taken_index[i];
        e.reward = r;
        e.terminal = !world[i].active();
        e.episode_id = opt.episode_id;
        e.agent_id = static_cast<std::uint32_t>(i);
        e.step_index = step_counts[i];
        result.trajectories[i].push_back(std::move(e));
      }
      ++step_counts[i];
    }
    for (std::size_t i : events.reached_goal)
      result.log.outcomes[i].arrival_time = world[i].elapsed;

    result.log.snapshots.push_back(world);
    if (opt.record_distributions) result.log.distributions.push_back(std::move(step_dists));

    any_active = false;
    for (const AgentState& a : world)
      if (a.active()) any_active = true;
  }

  for (std::size_t i = 0; i < world.size(); ++i) result.log.outcomes[i].status = world[i].status;
  return result;
}

}  // namespace navlab
