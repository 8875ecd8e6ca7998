// Copyright 2026 The navlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "navlab/eval.hpp"

using namespace navlab;

namespace {

ScenarioSpec single_agent_spec(Vec2 start, Vec2 goal, double v_pref = 1.0) {
  ScenarioSpec spec;
  spec.agents.push_back({start, goal, 0.3, v_pref, PolicyTag::NonCooperative});
  spec.rng_seed = 1;
  return spec;
}

ScenarioSpec head_on_spec() {
  ScenarioSpec spec;
  spec.agents.push_back({{-3, 0}, {3, 0}, 0.3, 1.0, PolicyTag::NonCooperative});
  spec.agents.push_back({{3, 0}, {-3, 0}, 0.3, 1.0, PolicyTag::NonCooperative});
  spec.domain_size = 8.0;
  spec.rng_seed = 2;
  return spec;
}

TestSuite one_case_suite(ScenarioSpec spec, const std::string& id) {
  TestSuite suite;
  suite.id = id;
  suite.scenarios.push_back(std::move(spec));
  return suite;
}

CaseOutcome make_case(bool success, std::vector<double> times) {
  CaseOutcome c;
  c.success = success;
  c.extra_times = std::move(times);
  return c;
}

}  // namespace

TEST_CASE("an unobstructed straight run has near-zero extra time") {
  ScenarioSpec spec = single_agent_spec({0, 0}, {3, 0});
  PolicyTable table;
  EpisodeResult r = run_episode(spec, table);
  REQUIRE(r.log.outcomes[0].status == AgentStatus::AtGoal);
  // One decision step of slack: arrival fires once inside the tolerance band.
  CHECK(extra_time_to_goal(r.log, 0) == Catch::Approx(0.0).margin(0.21));
}

TEST_CASE("a policy that waits two seconds pays two seconds of extra time") {
  ScenarioSpec spec = single_agent_spec({0, 0}, {3, 0});
  spec.agents[0].policy_tag = PolicyTag::Scripted;
  PolicyTable table;
  table.scripted = [](const std::vector<AgentState>& world, std::size_t ego,
                      std::mt19937_64& rng) -> PolicyDecision {
    if (world[ego].elapsed < 2.0 - 1e-9) return {Action{0.0, 0.0}, -1, {}};
    return non_cooperative_policy(world, ego, rng);
  };
  EpisodeResult r = run_episode(spec, table);
  REQUIRE(r.log.outcomes[0].status == AgentStatus::AtGoal);
  CHECK(extra_time_to_goal(r.log, 0) == Catch::Approx(2.0).margin(0.21));
}

TEST_CASE("extra time is undefined for agents that never arrive") {
  ScenarioSpec spec = single_agent_spec({0, 0}, {3, 0});
  spec.agents[0].policy_tag = PolicyTag::ZeroVelocity;
  PolicyTable table;
  EpisodeResult r = run_episode(spec, table);
  REQUIRE(r.log.outcomes[0].status == AgentStatus::TimedOut);
  CHECK_THROWS_AS(extra_time_to_goal(r.log, 0), std::invalid_argument);
}

TEST_CASE("standing still is scored as stuck on every case") {
  TestSuite suite = generate_test_suite(2, 10, 6.0, 21);
  PolicyOutcomes out = evaluate(baseline_eval_policy(PolicyTag::ZeroVelocity), suite);
  REQUIRE(out.cases.size() == 10);
  for (const CaseOutcome& c : out.cases) {
    CHECK(c.stuck);
    CHECK_FALSE(c.collision);
    CHECK_FALSE(c.success);
    CHECK(c.extra_times.empty());
  }
  std::vector<Metrics> metrics = compare({out});
  CHECK(metrics[0].pct_stuck == 100.0);
  CHECK(metrics[0].pct_collisions == 0.0);
  CHECK(metrics[0].timing_case_count == 0);
}

TEST_CASE("head-on non-cooperative agents collide") {
  TestSuite suite = one_case_suite(head_on_spec(), "headon");
  PolicyOutcomes out = evaluate(baseline_eval_policy(PolicyTag::NonCooperative), suite);
  REQUIRE(out.cases.size() == 1);
  CHECK(out.cases[0].collision);
  CHECK_FALSE(out.cases[0].stuck);  // collision takes attribution precedence
  CHECK_FALSE(out.cases[0].success);
}

TEST_CASE("well-separated non-cooperative agents all succeed") {
  ScenarioSpec spec;
  spec.agents.push_back({{0, 0}, {3, 0}, 0.3, 1.0, PolicyTag::NonCooperative});
  spec.agents.push_back({{0, 5}, {3, 5}, 0.3, 1.5, PolicyTag::NonCooperative});
  spec.domain_size = 8.0;
  spec.rng_seed = 3;
  TestSuite suite = one_case_suite(spec, "separated");
  PolicyOutcomes out = evaluate(baseline_eval_policy(PolicyTag::NonCooperative), suite);
  REQUIRE(out.cases.size() == 1);
  CHECK(out.cases[0].success);
  CHECK(out.cases[0].extra_times.size() == 2);
}

TEST_CASE("learned evaluation requires parameters") {
  TestSuite suite = one_case_suite(single_agent_spec({0, 0}, {3, 0}), "s");
  EvalPolicy p;
  p.name = "model";
  p.tag = PolicyTag::Learned;
  CHECK_THROWS_AS(evaluate(p, suite), std::invalid_argument);
  CHECK_THROWS_AS(baseline_eval_policy(PolicyTag::Learned), std::invalid_argument);
}

TEST_CASE("comparing a policy with itself yields identical rows") {
  TestSuite suite = generate_test_suite(2, 8, 6.0, 33);
  PolicyOutcomes out = evaluate(baseline_eval_policy(PolicyTag::NonCooperative), suite);
  std::vector<Metrics> metrics = compare({out, out});
  REQUIRE(metrics.size() == 2);
  CHECK(metrics[0].pct_collisions == metrics[1].pct_collisions);
  CHECK(metrics[0].pct_stuck == metrics[1].pct_stuck);
  CHECK(metrics[0].extra_time_mean == metrics[1].extra_time_mean);
  CHECK(metrics[0].extra_time_p90 == metrics[1].extra_time_p90);
  CHECK(metrics[0].timing_case_count == metrics[1].timing_case_count);
}

TEST_CASE("timing statistics use only mutually successful cases") {
  PolicyOutcomes a, b;
  a.policy_name = "a";
  b.policy_name = "b";
  a.suite_id = b.suite_id = "suite";
  a.cases = {make_case(true, {1.0}), make_case(true, {5.0})};
  b.cases = {make_case(true, {2.0}), make_case(false, {})};
  std::vector<Metrics> metrics = compare({a, b});
  // Case 1 failed for b, so both policies are timed on case 0 alone.
  CHECK(metrics[0].timing_case_count == 1);
  CHECK(metrics[0].extra_time_mean == Catch::Approx(1.0));
  CHECK(metrics[1].extra_time_mean == Catch::Approx(2.0));
}

TEST_CASE("compare rejects mismatched inputs") {
  PolicyOutcomes a, b;
  a.suite_id = "s1";
  b.suite_id = "s2";
  a.cases.resize(2);
  b.cases.resize(2);
  CHECK_THROWS_AS(compare({}), std::invalid_argument);
  CHECK_THROWS_AS(compare({a, b}), std::invalid_argument);
  b.suite_id = "s1";
  b.cases.resize(3);
  CHECK_THROWS_AS(compare({a, b}), std::invalid_argument);
}

TEST_CASE("nearest-rank percentiles on known samples") {
  const std::vector<double> ten{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CHECK(nearest_rank_percentile(ten, 75.0) == 8.0);
  CHECK(nearest_rank_percentile(ten, 90.0) == 9.0);
  CHECK(nearest_rank_percentile(ten, 100.0) == 10.0);
  CHECK(nearest_rank_percentile({3.0, 1.0, 2.0}, 50.0) == 2.0);
  CHECK(nearest_rank_percentile({7.0}, 75.0) == 7.0);
  CHECK(nearest_rank_percentile({}, 75.0) == 0.0);
}

TEST_CASE("percentiles agree with a sort-based oracle") {
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> sample(1 + static_cast<std::size_t>(rng() % 40));
    for (double& s : sample) s = u(rng);
    std::vector<double> sorted = sample;
    std::sort(sorted.begin(), sorted.end());
    for (double pct : {10.0, 50.0, 75.0, 90.0}) {
      const std::size_t rank = static_cast<std::size_t>(
          std::ceil(pct / 100.0 * static_cast<double>(sorted.size())));
      CHECK(nearest_rank_percentile(sample, pct) == sorted[rank - 1]);
    }
  }
}

TEST_CASE("suite generation is deterministic and well-formed") {
  TestSuite a = generate_test_suite(3, 12, 6.0, 77);
  TestSuite b = generate_test_suite(3, 12, 6.0, 77);
  REQUIRE(a.scenarios.size() == 12);
  CHECK(a.id == "n3_d6_s77");
  CHECK(a.generation_seed == 77);
  for (std::size_t i = 0; i < a.scenarios.size(); ++i) {
    REQUIRE(a.scenarios[i].agents.size() == 3);
    CHECK(a.scenarios[i].rng_seed == b.scenarios[i].rng_seed);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(a.scenarios[i].agents[k].start.x == b.scenarios[i].agents[k].start.x);
      CHECK(a.scenarios[i].agents[k].goal.y == b.scenarios[i].agents[k].goal.y);
    }
    CHECK_NOTHROW(validate_scenario(a.scenarios[i]));
  }
  TestSuite named = generate_test_suite(2, 1, 4.0, 5, "custom");
  CHECK(named.id == "custom");
}
