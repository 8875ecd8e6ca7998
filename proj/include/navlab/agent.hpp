// Copyright 2026 The navlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "navlab/geom.hpp"

namespace navlab {

enum class PolicyTag { Learned, NonCooperative, ZeroVelocity, Scripted };
enum class AgentStatus { Active, AtGoal, Collided, TimedOut };

inline std::string to_string(PolicyTag t) {
  switch (t) {
    case PolicyTag::Learned: return "learned";
    case PolicyTag::NonCooperative: return "noncoop";
    case PolicyTag::ZeroVelocity: return "zerovel";
    case PolicyTag::Scripted: return "scripted";
  }
  return "?";
}

inline PolicyTag policy_tag_from_string(const std::string& s) {
  if (s == "learned") return PolicyTag::Learned;
  if (s == "noncoop") return PolicyTag::NonCooperative;
  if (s == "zerovel") return PolicyTag::ZeroVelocity;
  if (s == "scripted") return PolicyTag::Scripted;
  throw std::invalid_argument("unknown policy tag: " + s);
}

inline std::string to_string(AgentStatus s) {
  switch (s) {
    case AgentStatus::Active: return "active";
    case AgentStatus::AtGoal: return "at_goal";
    case AgentStatus::Collided: return "collided";
    case AgentStatus::TimedOut: return "timed_out";
  }
  return "?";
}

// Full simulated state of one agent.
struct AgentState {
  Vec2 position;
  Vec2 velocity;
  double heading = 0.0;  // radians, global frame
  double radius = 0.5;
  Vec2 goal;
  double v_pref = 1.0;
  PolicyTag policy_tag = PolicyTag::Learned;
  AgentStatus status = AgentStatus::Active;
  double elapsed = 0.0;

  bool active() const { return status == AgentStatus::Active; }
  double distance_to_goal() const { return (goal - position).norm(); }
};

// One discrete action: a speed and a change in heading angle.
struct Action {
  double speed = 0.0;
  double heading_change = 0.0;
};

// Ordered, fixed-cardinality list of discrete actions. Index i maps to the
// same (speed class, heading) slot for every preferred speed.
class ActionSet {
 public:
  explicit ActionSet(std::vector<Action> actions) : actions_(std::move(actions)) {}

  std::size_t size() const { return actions_.size(); }
  const Action& operator[](std::size_t i) const { return actions_.at(i); }
  const std::vector<Action>& actions() const { return actions_; }

 private:
  std::vector<Action> actions_;
};

// Full speed: 6 headings evenly spaced in [-pi/6, pi/6].
// Half and zero speed: headings {-pi/6, 0, pi/6}. 12 actions total.
inline ActionSet build_action_set(double v_pref) {
  if (v_pref <= 0.0) throw std::invalid_argument("build_action_set: v_pref must be positive");
  std::vector<Action> a;
  a.reserve(12);
  const double lo = -kPi / 6.0;
  const double step = (kPi / 3.0) / 5.0;
  for (int i = 0; i < 6; ++i) a.push_back({v_pref, lo + i * step});
  for (double dh : {-kPi / 6.0, 0.0, kPi / 6.0}) a.push_back({0.5 * v_pref, dh});
  for (double dh : {-kPi / 6.0, 0.0, kPi / 6.0}) a.push_back({0.0, dh});
  return ActionSet(std::move(a));
}

constexpr std::size_t kActionCount = 12;

// Signed clearance between two disks; negative iff they overlap.
inline double surface_distance(const AgentState& a, const AgentState& b) {
  return (a.position - b.position).norm() - a.radius - b.radius;
}

struct RewardParams {
  double goal_reward = 1.0;
  double collision_penalty = -0.25;
  double proximity_threshold = 0.2;
  double proximity_offset = -0.1;
  double proximity_slope = 0.05;
};

// Sparse reward: goal, collision, getting-too-close penalty, else zero.
// Branches checked in order goal -> collision -> proximity -> zero.
inline double reward(const AgentState& agent, const std::vector<AgentState>& others,
                     bool reached_goal, const RewardParams& p = {}) {
  if (reached_goal) return p.goal_reward;
  bool have_other = false;
  double d_min = 0.0;
  for (const AgentState& o : others) {
    const double d = surface_distance(agent, o);
    if (!have_other || d < d_min) {
      d_min = d;
      have_other = true;
    }
  }
  if (!have_other) return 0.0;
  if (d_min < 0.0) return p.collision_penalty;
  if (d_min > 0.0 && d_min < p.proximity_threshold)
    return p.proximity_offset + p.proximity_slope * d_min;
  return 0.0;
}

}  // namespace navlab
