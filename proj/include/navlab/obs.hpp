// Copyright 2026 The navlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "navlab/agent.hpp"
#include "navlab/geom.hpp"

namespace navlab {

// Ego agent's own state in its local frame: [d_g, v_pref, psi_ego, r].
struct EgoObservation {
  double dist_to_goal = 0.0;
  double v_pref = 1.0;
  double heading_ego = 0.0;
  double radius = 0.5;
};

// One other agent in the ego frame:
// [px, py, vx, vy, r, dist_to_agent, combined_radius].
struct OtherObservation {
  double px = 0.0, py = 0.0;
  double vx = 0.0, vy = 0.0;
  double radius = 0.0;
  double dist_to_agent = 0.0;
  double combined_radius = 0.0;
};

constexpr std::size_t kEgoDim = 4;
constexpr std::size_t kOtherDim = 7;

// Others are sorted by non-increasing distance: farthest first, closest last,
// so the closest agent is the final LSTM input.
struct ObservationSequence {
  EgoObservation ego;
  std::vector<OtherObservation> others;
};

struct ObsConfig {
  double sensing_radius = std::numeric_limits<double>::infinity();
  std::size_t max_others = 19;  // farthest dropped first when exceeded
};

// Local frame: origin at the ego position, x-axis toward the goal. When the
// agent is on top of its goal the frame direction is ill-defined; the agent's
// heading is used instead (the state is transient, arrival fires immediately).
inline double ego_frame_angle(const AgentState& agent) {
  const Vec2 to_goal = agent.goal - agent.position;
  if (to_goal.norm() < 1e-6) return agent.heading;
  return std::atan2(to_goal.y, to_goal.x);
}

inline OtherObservation to_ego_frame(const AgentState& agent, const AgentState& other) {
  const double frame = ego_frame_angle(agent);
  const Vec2 rel_p = (other.position - agent.position).rotated(-frame);
  const Vec2 rel_v = other.velocity.rotated(-frame);
  OtherObservation o;
  o.px = rel_p.x;
  o.py = rel_p.y;
  o.vx = rel_v.x;
  o.vy = rel_v.y;
  o.radius = other.radius;
  o.dist_to_agent = rel_p.norm();
  o.combined_radius = other.radius + agent.radius;
  return o;
}

inline EgoObservation ego_observation(const AgentState& agent) {
  EgoObservation e;
  e.dist_to_goal = agent.distance_to_goal();
  e.v_pref = agent.v_pref;
  e.heading_ego = wrap_angle(agent.heading - ego_frame_angle(agent));
  e.radius = agent.radius;
  return e;
}

// Observation of the world from one agent's point of view. Includes every
// other Active agent within the sensing radius, farthest first. Distance ties
// break by ascending agent id.
inline ObservationSequence build_observation(const std::vector<AgentState>& world,
                                             std::size_t ego_index,
                                             const ObsConfig& cfg = {}) {
  const AgentState& ego = world[ego_index];
  ObservationSequence seq;
  seq.ego = ego_observation(ego);

  struct Entry {
    double dist;
    std::size_t id;
    OtherObservation obs;
  };
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < world.size(); ++i) {
    if (i == ego_index || !world[i].active()) continue;
    OtherObservation o = to_ego_frame(ego, world[i]);
    if (o.dist_to_agent > cfg.sensing_radius) continue;
    entries.push_back({o.dist_to_agent, i, o});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.dist != b.dist) return a.dist > b.dist;
    return a.id < b.id;
  });
  if (entries.size() > cfg.max_others)
    entries.erase(entries.begin(), entries.begin() + (entries.size() - cfg.max_others));
  seq.others.reserve(entries.size());
  for (const Entry& e : entries) seq.others.push_back(e.obs);
  return seq;
}

}  // namespace navlab
