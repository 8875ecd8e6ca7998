// Copyright 2026 The navlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "navlab/net.hpp"
#include "navlab/sim.hpp"

namespace navlab {

enum class ActionMode { Sample, Greedy };

// Sample-mode draws from the categorical distribution; greedy returns the
// argmax with lowest-index tie-break.
inline int select_action(const std::vector<double>& dist, ActionMode mode,
                         std::mt19937_64& rng) {
  if (dist.empty()) throw std::invalid_argument("select_action: empty distribution");
  double sum = 0.0;
  for (double p : dist) {
    if (p < 0.0 || !std::isfinite(p))
      throw std::invalid_argument("select_action: invalid probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw std::invalid_argument("select_action: distribution not normalized");
  if (mode == ActionMode::Greedy) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(dist.size()); ++i)
      if (dist[i] > dist[best]) best = i;
    return best;
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = u(rng) * sum;
  double acc = 0.0;
  for (int i = 0; i < static_cast<int>(dist.size()); ++i) {
    acc += dist[i];
    if (r < acc) return i;
  }
  return static_cast<int>(dist.size()) - 1;
}

// Network-backed policy: build the observation, run forward, pick an action
// from the agent's own (v_pref-scaled) action set.
template <typename S = float>
struct LearnedPolicy {
  std::shared_ptr<const NetParams<S>> params;
  ActionMode mode = ActionMode::Greedy;
  ObsConfig obs_config;

  PolicyDecision operator()(const std::vector<AgentState>& world, std::size_t ego,
                            std::mt19937_64& rng) const {
    const ObservationSequence obs = build_observation(world, ego, obs_config);
    const ForwardResult<S> fr = forward(obs, *params);
    std::vector<double> dist(fr.policy.size());
    for (int i = 0; i < fr.policy.size(); ++i) dist[i] = static_cast<double>(fr.policy(i));
    const int idx = select_action(dist, mode, rng);
    const ActionSet actions = build_action_set(world[ego].v_pref);
    return {actions[static_cast<std::size_t>(idx)], idx, std::move(dist)};
  }
};

// Scripted expert: picks the discrete action making the most progress toward
// the goal, vetoing any action that would drop the one-step-ahead clearance
// below zero (others propagated at constant velocity).
struct ScriptedExpert {
  double dt = 0.2;

  int choose_index(const std::vector<AgentState>& world, std::size_t ego) const {
    const AgentState& a = world[ego];
    const ActionSet actions = build_action_set(a.v_pref);
    int best = -1;
    double best_dist = 0.0;
    for (std::size_t k = 0; k < actions.size(); ++k) {
      const Action& u = actions[k];
      const double heading = wrap_angle(a.heading + u.heading_change);
      const Vec2 next = a.position + dt * Vec2{u.speed * std::cos(heading),
                                               u.speed * std::sin(heading)};
      bool vetoed = false;
      for (std::size_t j = 0; j < world.size(); ++j) {
        if (j == ego) continue;
        const AgentState& o = world[j];
        if (o.status == AgentStatus::Collided || o.status == AgentStatus::AtGoal) continue;
        const Vec2 o_next = o.position + dt * o.velocity;
        if ((next - o_next).norm() - a.radius - o.radius < 0.0) {
          vetoed = true;
          break;
        }
      }
      if (vetoed) continue;
      const double d = (a.goal - next).norm();
      if (best < 0 || d < best_dist) {
        best = static_cast<int>(k);
        best_dist = d;
      }
    }
    if (best < 0) best = 10;  // zero speed, straight: stand still when boxed in
    return best;
  }

  PolicyDecision operator()(const std::vector<AgentState>& world, std::size_t ego,
                            std::mt19937_64&) const {
    const int idx = choose_index(world, ego);
    const ActionSet actions = build_action_set(world[ego].v_pref);
    return {actions[static_cast<std::size_t>(idx)], idx, {}};
  }
};

struct ReturnTarget {
  ObservationSequence observation;
  int action_index = 0;
  double return_value = 0.0;  // k-step discounted return R_t
  double advantage = 0.0;     // R_t - V(s_t)
};

// k-step discounted returns over one agent's time-ordered trajectory.
// `values` are the value estimates V(s_t) captured when the targets are
// constructed; segment boundaries every k_horizon steps re-bootstrap from the
// next segment's first value. The final bootstrap is 0 for terminal
// trajectories, else `bootstrap_value`.
inline std::vector<ReturnTarget> discounted_returns(const std::vector<Experience>& trajectory,
                                                    const std::vector<double>& values,
                                                    double bootstrap_value, double gamma,
                                                    int k_horizon) {
  if (trajectory.empty()) throw std::invalid_argument("discounted_returns: empty trajectory");
  if (values.size() != trajectory.size())
    throw std::invalid_argument("discounted_returns: one value per step required");
  if (k_horizon < 1) throw std::invalid_argument("discounted_returns: k_horizon must be >= 1");
  const int n = static_cast<int>(trajectory.size());
  std::vector<ReturnTarget> targets(trajectory.size());
  double running = trajectory.back().terminal ? 0.0 : bootstrap_value;
  for (int t = n - 1; t >= 0; --t) {
    if (t + 1 < n && (t + 1) % k_horizon == 0) running = values[t + 1];
    running = trajectory[t].reward + gamma * running;
    targets[t].observation = trajectory[t].observation;
    targets[t].action_index = trajectory[t].action_index;
    targets[t].return_value = running;
    targets[t].advantage = running - values[t];
  }
  return targets;
}

// Convenience: evaluate V(s_t) with the given parameters, then build targets.
template <typename S>
std::vector<ReturnTarget> build_return_targets(const std::vector<Experience>& trajectory,
                                               const NetParams<S>& params, double gamma,
                                               int k_horizon) {
  std::vector<double> values;
  values.reserve(trajectory.size());
  for (const Experience& e : trajectory)
    values.push_back(static_cast<double>(forward(e.observation, params).value));
  return discounted_returns(trajectory, values, 0.0, gamma, k_horizon);
}

template <typename S>
struct A3CResult {
  double value_loss = 0.0;   // mean (R - V)^2
  double policy_loss = 0.0;  // mean -log pi(u) * advantage
  double entropy = 0.0;      // mean policy entropy
  Gradients<S> grads;
};

// Combined actor-critic gradients for one batch: descend the value loss and
// ascend log pi(u) * advantage + beta * entropy. Advantages are treated as
// constants in the policy term.
template <typename S>
A3CResult<S> a3c_loss_and_grads(const std::vector<ReturnTarget>& batch,
                                const NetParams<S>& params, double entropy_beta) {
  if (batch.empty()) throw std::invalid_argument("a3c_loss_and_grads: empty batch");
  A3CResult<S> out;
  out.grads = zeros_like(params);
  const S inv_n = static_cast<S>(1.0 / static_cast<double>(batch.size()));
  for (const ReturnTarget& tgt : batch) {
    ForwardResult<S> fr = forward(tgt.observation, params);
    const int A = params.config.action_count;
    if (tgt.action_index < 0 || tgt.action_index >= A)
      throw std::invalid_argument("a3c_loss_and_grads: action index out of range");

    const double V = static_cast<double>(fr.value);
    const double err = V - tgt.return_value;
    out.value_loss += err * err;
    const S value_seed = static_cast<S>(2.0 * err) * inv_n;

    // softmax cross terms: d log pi_u / d logit_j = 1{u=j} - p_j
    // entropy: dH / d logit_j = -p_j (log p_j + H)
    Vec<S> logit_seed(A);
    double H = 0.0;
    for (int j = 0; j < A; ++j) {
      const double pj = static_cast<double>(fr.policy(j));
      if (pj > 0.0) H -= pj * std::log(pj);
    }
    const double pu = std::max(static_cast<double>(fr.policy(tgt.action_index)), 1e-12);
    out.policy_loss += -std::log(pu) * tgt.advantage;
    out.entropy += H;
    for (int j = 0; j < A; ++j) {
      const double pj = static_cast<double>(fr.policy(j));
      const double onehot = (j == tgt.action_index) ? 1.0 : 0.0;
      const double logpj = pj > 0.0 ? std::log(pj) : -27.0;
      const double seed =
          tgt.advantage * (pj - onehot) + entropy_beta * pj * (logpj + H);
      logit_seed(j) = static_cast<S>(seed) * inv_n;
    }
    Gradients<S> g = backward(fr.trace, logit_seed, value_seed, params);
    accumulate(out.grads, g);
  }
  out.value_loss /= static_cast<double>(batch.size());
  out.policy_loss /= static_cast<double>(batch.size());
  out.entropy /= static_cast<double>(batch.size());
  if (!std::isfinite(out.value_loss) || !std::isfinite(out.policy_loss))
    throw std::runtime_error("a3c_loss_and_grads: non-finite loss");
  return out;
}

struct SupervisedExample {
  ObservationSequence observation;
  int target_action_index = 0;
  double target_value = 0.0;
};

// Behavior-cloning dataset from the scripted expert on 1-2 agent scenarios.
// Value targets follow the gamma^(time-to-go * v_pref) shape, which reduces
// to gamma^d_g.
inline std::vector<SupervisedExample> generate_supervised_dataset(std::size_t n_examples,
                                                                  std::mt19937_64& rng,
                                                                  double gamma = 0.97,
                                                                  double dt = 0.2) {
  std::vector<SupervisedExample> dataset;
  dataset.reserve(n_examples);
  ScriptedExpert expert{dt};
  PolicyTable table;
  table.learned = expert;  // expert drives the recorded agent
  std::uniform_int_distribution<int> coin(0, 1);

  while (dataset.size() < n_examples) {
    const int n_agents = 1 + coin(rng);
    ScenarioSpec spec;
    try {
      spec = generate_random_scenario(static_cast<std::size_t>(n_agents), 4.0, rng);
    } catch (const std::runtime_error&) {
      continue;
    }
    spec.rng_seed = rng();
    spec.agents[0].policy_tag = PolicyTag::Learned;
    for (std::size_t i = 1; i < spec.agents.size(); ++i)
      spec.agents[i].policy_tag =
          coin(rng) ? PolicyTag::NonCooperative : PolicyTag::ZeroVelocity;

    EpisodeOptions opt;
    opt.collect_experiences = true;
    opt.episode_id = dataset.size();
    EpisodeResult result = run_episode(spec, table, opt);
    for (const Experience& e : result.trajectories[0]) {
      SupervisedExample ex;
      ex.observation = e.observation;
      ex.target_action_index = e.action_index;
      ex.target_value = std::pow(gamma, e.observation.ego.dist_to_goal);
      dataset.push_back(std::move(ex));
      if (dataset.size() >= n_examples) break;
    }
  }
  return dataset;
}

struct SupervisedStats {
  std::vector<double> epoch_losses;
};

// Cross-entropy on the policy head plus squared error on the value head,
// minibatch Adam. Throws on divergence.
template <typename S>
SupervisedStats supervised_init(const std::vector<SupervisedExample>& dataset,
                                NetParams<S>& params, int epochs, double lr = 1e-3,
                                int batch_size = 100, std::uint64_t seed = 0) {
  if (dataset.empty()) throw std::invalid_argument("supervised_init: empty dataset");
  if (epochs < 1) throw std::invalid_argument("supervised_init: epochs must be >= 1");
  AdamState<S> adam = AdamState<S>::make(params);
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  SupervisedStats stats;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t pos = 0;
    while (pos < order.size()) {
      const std::size_t take = std::min<std::size_t>(batch_size, order.size() - pos);
      Gradients<S> grads = zeros_like(params);
      const S inv_n = static_cast<S>(1.0 / static_cast<double>(take));
      double batch_loss = 0.0;
      for (std::size_t b = 0; b < take; ++b) {
        const SupervisedExample& ex = dataset[order[pos + b]];
        ForwardResult<S> fr = forward(ex.observation, params);
        const int A = params.config.action_count;
        Vec<S> logit_seed(A);
        for (int j = 0; j < A; ++j) {
          const double pj = static_cast<double>(fr.policy(j));
          const double onehot = (j == ex.target_action_index) ? 1.0 : 0.0;
          logit_seed(j) = static_cast<S>(pj - onehot) * inv_n;
        }
        const double verr = static_cast<double>(fr.value) - ex.target_value;
        const S value_seed = static_cast<S>(2.0 * verr) * inv_n;
        const double pu =
            std::max(static_cast<double>(fr.policy(ex.target_action_index)), 1e-12);
        batch_loss += -std::log(pu) + verr * verr;
        accumulate(grads, backward(fr.trace, logit_seed, value_seed, params));
      }
      batch_loss /= static_cast<double>(take);
      if (!std::isfinite(batch_loss))
        throw std::runtime_error("supervised_init diverged: non-finite loss");
      adam_update(params, grads, adam, lr);
      epoch_loss += batch_loss * static_cast<double>(take);
      pos += take;
    }
    stats.epoch_losses.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  return stats;
}

}  // namespace navlab
