// Copyright 2026 The navlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "navlab/agent.hpp"
#include "navlab/geom.hpp"

namespace navlab {

// Minimum pairwise surface clearance required between spawn disks, chosen
// outside the proximity-penalty zone.
constexpr double kSpawnMargin = 0.2;

struct AgentSpec {
  Vec2 start;
  Vec2 goal;
  double radius = 0.5;
  double v_pref = 1.0;
  PolicyTag policy_tag = PolicyTag::Learned;
};

struct ScenarioSpec {
  std::vector<AgentSpec> agents;
  double domain_size = 4.0;  // square side, meters
  std::uint64_t rng_seed = 0;
  double dt = 0.2;
  double time_limit = 0.0;  // seconds; 0 = per-agent max(30, 4 * straight-line time)

  std::size_t n_agents() const { return agents.size(); }
};

// Episode time budget for one agent.
inline double agent_time_limit(const ScenarioSpec& spec, const AgentSpec& a) {
  if (spec.time_limit > 0.0) return spec.time_limit;
  const double straight = (a.goal - a.start).norm() / a.v_pref;
  return std::max(30.0, 4.0 * straight);
}

inline void validate_scenario(const ScenarioSpec& spec) {
  if (spec.agents.empty()) throw std::invalid_argument("scenario has no agents");
  if (spec.dt <= 0.0) throw std::invalid_argument("scenario dt must be positive");
  for (std::size_t i = 0; i < spec.agents.size(); ++i) {
    const AgentSpec& a = spec.agents[i];
    if (a.radius <= 0.0 || a.v_pref <= 0.0)
      throw std::invalid_argument("agent radius and v_pref must be positive");
    for (std::size_t j = i + 1; j < spec.agents.size(); ++j) {
      const AgentSpec& b = spec.agents[j];
      const double d = (a.start - b.start).norm() - a.radius - b.radius;
      if (d <= 0.0) throw std::invalid_argument("agent starts overlap");
    }
  }
}

inline AgentState make_agent_state(const AgentSpec& s) {
  AgentState a;
  a.position = s.start;
  a.velocity = {0.0, 0.0};
  a.heading = std::atan2(s.goal.y - s.start.y, s.goal.x - s.start.x);
  a.radius = s.radius;
  a.goal = s.goal;
  a.v_pref = s.v_pref;
  a.policy_tag = s.policy_tag;
  return a;
}

inline std::vector<AgentState> make_world(const ScenarioSpec& spec) {
  std::vector<AgentState> world;
  world.reserve(spec.agents.size());
  for (const AgentSpec& s : spec.agents) world.push_back(make_agent_state(s));
  return world;
}

// Random scenario: starts and goals uniform in the domain, radii in
// [0.2, 0.8] m and preferred speeds in [0.5, 2.0] m/s. Rejection-samples
// until starts (and goals) keep a clearance margin.
inline ScenarioSpec generate_random_scenario(std::size_t n, double domain_size,
                                             std::mt19937_64& rng,
                                             PolicyTag tag = PolicyTag::Learned) {
  if (n < 1) throw std::invalid_argument("need at least one agent");
  ScenarioSpec spec;
  spec.domain_size = domain_size;
  std::uniform_real_distribution<double> upos(0.0, domain_size);
  std::uniform_real_distribution<double> urad(0.2, 0.8);
  std::uniform_real_distribution<double> uvel(0.5, 2.0);

  const int max_attempts = 2000;
  int attempts = 0;
  while (spec.agents.size() < n) {
    if (++attempts > max_attempts)
      throw std::runtime_error("scenario generation failed: domain too crowded");
    AgentSpec a;
    a.radius = urad(rng);
    a.v_pref = uvel(rng);
    a.policy_tag = tag;
    a.start = {upos(rng), upos(rng)};
    a.goal = {upos(rng), upos(rng)};
    if ((a.goal - a.start).norm() < 0.5) continue;  // degenerate trips rejected
    bool ok = true;
    for (const AgentSpec& b : spec.agents) {
      if ((a.start - b.start).norm() - a.radius - b.radius < kSpawnMargin) ok = false;
      if ((a.goal - b.goal).norm() - a.radius - b.radius < kSpawnMargin) ok = false;
      if ((a.start - b.goal).norm() - a.radius - b.radius < 0.0) ok = false;
      if ((a.goal - b.start).norm() - a.radius - b.radius < 0.0) ok = false;
    }
    if (ok) spec.agents.push_back(a);
  }
  return spec;
}

enum class StructuredKind { Circle, PairSwaps };

// Circle: agents evenly spaced on a circle, goals antipodal.
// PairSwaps: opposing head-on pairs on parallel lanes.
inline ScenarioSpec generate_structured_scenario(StructuredKind kind, std::size_t n,
                                                 PolicyTag tag = PolicyTag::Learned) {
  ScenarioSpec spec;
  const double radius = 0.3;
  const double v_pref = 1.0;
  if (kind == StructuredKind::Circle) {
    if (n < 2) throw std::invalid_argument("circle scenario needs n >= 2");
    // Adjacent spacing must clear the spawn margin.
    const double min_r =
        (2.0 * radius + kSpawnMargin + 0.05) / (2.0 * std::sin(kPi / static_cast<double>(n)));
    const double circle_r = std::max(3.0, min_r);
    for (std::size_t i = 0; i < n; ++i) {
      const double theta = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(n);
      AgentSpec a;
      a.radius = radius;
      a.v_pref = v_pref;
      a.policy_tag = tag;
      a.start = {circle_r * std::cos(theta), circle_r * std::sin(theta)};
      a.goal = {-a.start.x, -a.start.y};
      spec.agents.push_back(a);
    }
    spec.domain_size = 2.0 * circle_r + 2.0;
  } else {
    if (n < 2 || n % 2 != 0) throw std::invalid_argument("pair_swaps needs even n >= 2");
    const std::size_t pairs = n / 2;
    const double half_span = 3.0;
    for (std::size_t k = 0; k < pairs; ++k) {
      const double y = (static_cast<double>(k) - (static_cast<double>(pairs) - 1.0) / 2.0) * 1.2;
      AgentSpec left;
      left.radius = radius;
      left.v_pref = v_pref;
      left.policy_tag = tag;
      left.start = {-half_span, y};
      left.goal = {half_span, y};
      AgentSpec right = left;
      right.start = {half_span, y};
      right.goal = {-half_span, y};
      spec.agents.push_back(left);
      spec.agents.push_back(right);
    }
    spec.domain_size = 2.0 * half_span + 2.0;
  }
  validate_scenario(spec);
  return spec;
}

}  // namespace navlab
