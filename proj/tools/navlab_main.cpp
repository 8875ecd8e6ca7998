// Copyright 2026 The navlab Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Single entry point for the pipeline: dataset generation, supervised
// initialization, RL training, suite generation, evaluation, rollout export.

#include <CLI11.hpp>
#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "navlab/config.hpp"
#include "navlab/io.hpp"

namespace fs = std::filesystem;
using namespace navlab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitDiverged = 3;

std::atomic<bool> g_stop{false};

void handle_signal(int) { g_stop.store(true); }

struct CommonArgs {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir = "out";
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "configuration file (key = value sections)");
  cmd->add_option("--seed", args.seed, "master RNG seed")->each([&](const std::string&) {
    args.seed_set = true;
  });
  cmd->add_option("--out", args.out_dir, "output directory (created if missing)");
  // one value per occurrence, so positional arguments are never swallowed
  cmd->add_option("--set", args.overrides, "override a config key, e.g. --set train.lr=1e-4")
      ->allow_extra_args(false);
}

RunSettings make_settings(const CommonArgs& args) {
  RunSettings settings;
  if (!args.config_path.empty()) load_config_file(settings, args.config_path);
  apply_overrides(settings, args.overrides);
  if (args.seed_set) settings.train.seed = args.seed;
  settings.net.max_sequence = static_cast<int>(settings.obs.max_others);
  fs::create_directories(args.out_dir);
  write_effective_config(settings, args.out_dir + "/effective_config.ini");
  return settings;
}

double single_agent_success_rate(const NetParams<float>& params, const RunSettings& s,
                                 int cases, std::uint64_t seed) {
  auto shared = std::make_shared<const NetParams<float>>(params);
  std::mt19937_64 rng(seed);
  int ok = 0;
  for (int i = 0; i < cases; ++i) {
    ScenarioSpec spec = generate_random_scenario(1, s.train.domain_small, rng);
    spec.dt = s.train.dt;
    spec.rng_seed = rng();
    PolicyTable table;
    LearnedPolicy<float> lp;
    lp.params = shared;
    lp.mode = ActionMode::Greedy;
    lp.obs_config = s.obs;
    table.learned = lp;
    EpisodeResult er = run_episode(spec, table);
    if (er.log.outcomes[0].status == AgentStatus::AtGoal) ++ok;
  }
  return static_cast<double>(ok) / cases;
}

int cmd_pretrain(const CommonArgs& args) {
  RunSettings s = make_settings(args);
  std::printf("generating %zu supervised examples...\n", s.train.supervised_examples);
  std::mt19937_64 rng(s.train.seed);
  auto dataset =
      generate_supervised_dataset(s.train.supervised_examples, rng, s.train.gamma, s.train.dt);
  std::printf("training for %d epochs...\n", s.train.supervised_epochs);
  Checkpoint ck;
  ck.params = init_params<float>(s.net, s.train.seed);
  SupervisedStats stats = supervised_init(dataset, ck.params, s.train.supervised_epochs,
                                          s.train.supervised_lr, s.train.batch_size,
                                          s.train.seed + 1);
  ck.adam = AdamState<float>::make(ck.params);
  const std::string ck_path = args.out_dir + "/pretrain.bin";
  checkpoint_save(ck, ck_path);
  {
    std::ofstream os(args.out_dir + "/pretrain_loss.csv");
    os << "epoch,loss\n";
    for (std::size_t e = 0; e < stats.epoch_losses.size(); ++e)
      os << e + 1 << "," << stats.epoch_losses[e] << "\n";
  }
  const double success = single_agent_success_rate(ck.params, s, 100, s.train.seed + 2);
  std::printf("checkpoint: %s\n", ck_path.c_str());
  std::printf("single-agent greedy success: %.0f%%\n", 100.0 * success);
  return kExitOk;
}

int cmd_train(const CommonArgs& args, const std::string& init_path) {
  RunSettings s = make_settings(args);
  Checkpoint ck = checkpoint_load(init_path, s.net.action_count);
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  RunResult result = run_training(s.train, std::move(ck), args.out_dir, &g_stop);
  write_training_log(result.log, args.out_dir + "/training_log.csv");
  const std::string final_path = args.out_dir + "/checkpoint_final.bin";
  checkpoint_save(result.checkpoint, final_path);
  std::printf("episodes trained: %llu\n",
              static_cast<unsigned long long>(result.checkpoint.episodes_trained));
  std::printf("final checkpoint: %s\n", final_path.c_str());
  if (result.diverged) {
    std::fprintf(stderr, "training halted: divergence; last good checkpoint: %s\n",
                 result.last_good_checkpoint.empty() ? final_path.c_str()
                                                     : result.last_good_checkpoint.c_str());
    return kExitDiverged;
  }
  return kExitOk;
}

EvalPolicy resolve_policy(const std::string& spec_str, int action_count) {
  if (spec_str == "noncoop") return baseline_eval_policy(PolicyTag::NonCooperative);
  if (spec_str == "zerovel") return baseline_eval_policy(PolicyTag::ZeroVelocity);
  Checkpoint ck = checkpoint_load(spec_str, action_count);
  EvalPolicy p;
  p.name = fs::path(spec_str).stem().string();
  p.tag = PolicyTag::Learned;
  p.params = std::make_shared<const NetParams<float>>(std::move(ck.params));
  return p;
}

int cmd_eval(const CommonArgs& args, const std::string& suite_path,
             const std::vector<std::string>& policy_specs) {
  RunSettings s = make_settings(args);
  TestSuite suite = load_suite(suite_path);
  std::vector<PolicyOutcomes> all;
  for (const std::string& ps : policy_specs) {
    EvalPolicy policy = resolve_policy(ps, s.net.action_count);
    std::printf("evaluating %s on %zu cases...\n", policy.name.c_str(),
                suite.scenarios.size());
    PolicyOutcomes outcomes = evaluate(policy, suite, s.obs);
    save_outcomes(outcomes, args.out_dir + "/outcomes_" + policy.name + ".json");
    all.push_back(std::move(outcomes));
  }
  std::vector<Metrics> metrics = compare(all);
  save_report_csv(metrics, args.out_dir + "/report.csv");
  std::cout << format_report_table(metrics);
  return kExitOk;
}

int cmd_rollout(const CommonArgs& args, const std::string& policy_spec,
                const std::string& scenario_file, const std::string& kind, int n_agents,
                double domain, bool record_dists, bool sample_mode) {
  RunSettings s = make_settings(args);
  ScenarioSpec spec;
  if (!scenario_file.empty()) {
    std::ifstream is(scenario_file);
    if (!is) throw std::runtime_error("cannot open scenario: " + scenario_file);
    spec = scenario_from_json(json::parse(is));
  } else if (kind == "circle") {
    spec = generate_structured_scenario(StructuredKind::Circle, n_agents);
  } else if (kind == "pair_swaps") {
    spec = generate_structured_scenario(StructuredKind::PairSwaps, n_agents);
  } else if (kind == "random") {
    std::mt19937_64 rng(s.train.seed);
    spec = generate_random_scenario(n_agents, domain, rng);
  } else {
    throw CLI::ValidationError("--kind must be circle, pair_swaps, or random");
  }
  spec.dt = s.train.dt;
  spec.rng_seed = s.train.seed;

  EvalPolicy policy = resolve_policy(policy_spec, s.net.action_count);
  for (AgentSpec& a : spec.agents) a.policy_tag = policy.tag;
  PolicyTable table;
  if (policy.tag == PolicyTag::Learned) {
    LearnedPolicy<float> lp;
    lp.params = policy.params;
    lp.mode = sample_mode ? ActionMode::Sample : ActionMode::Greedy;
    lp.obs_config = s.obs;
    table.learned = lp;
  }
  EpisodeOptions opt;
  opt.obs_config = s.obs;
  opt.record_distributions = record_dists;
  EpisodeResult er = run_episode(spec, table, opt);
  save_episode_json(er.log, args.out_dir + "/rollout.json");
  save_episode_csv(er.log, args.out_dir + "/rollout.csv");
  int reached = 0;
  for (const AgentOutcome& o : er.log.outcomes)
    if (o.status == AgentStatus::AtGoal) ++reached;
  std::printf("rollout: %zu agents, %d reached goal, %zu steps\n", spec.agents.size(),
              reached, er.log.snapshots.size() - 1);
  std::printf("wrote %s and %s\n", (args.out_dir + "/rollout.json").c_str(),
              (args.out_dir + "/rollout.csv").c_str());
  return kExitOk;
}

int cmd_gen_suite(const CommonArgs& args, int n_agents, int n_cases, double domain) {
  RunSettings s = make_settings(args);
  TestSuite suite =
      generate_test_suite(n_agents, n_cases, domain, s.train.seed);
  for (ScenarioSpec& sc : suite.scenarios) sc.dt = s.train.dt;
  const std::string path = args.out_dir + "/suite_" + suite.id + ".json";
  save_suite(suite, path);
  std::printf("wrote %s (%d cases)\n", path.c_str(), n_cases);
  return kExitOk;
}

int cmd_gen_dataset(const CommonArgs& args) {
  RunSettings s = make_settings(args);
  std::mt19937_64 rng(s.train.seed);
  auto dataset =
      generate_supervised_dataset(s.train.supervised_examples, rng, s.train.gamma, s.train.dt);
  const std::string path = args.out_dir + "/dataset.bin";
  save_dataset(dataset, path);
  std::printf("wrote %s (%zu examples)\n", path.c_str(), dataset.size());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-agent collision avoidance training and evaluation"};
  app.require_subcommand(1);

  CommonArgs common;

  auto* pretrain = app.add_subcommand("pretrain", "supervised initialization");
  add_common(pretrain, common);

  std::string init_path;
  auto* train = app.add_subcommand("train", "actor-critic training");
  add_common(train, common);
  train->add_option("--init", init_path, "initial checkpoint (from pretrain or a resume)")
      ->required();

  std::string suite_path;
  std::vector<std::string> policy_specs;
  auto* evalc = app.add_subcommand("eval", "evaluate checkpoints/baselines on a suite");
  add_common(evalc, common);
  evalc->add_option("--suite", suite_path, "suite JSON file")->required();
  evalc->add_option("policies", policy_specs,
                    "checkpoint paths or baseline tags (noncoop, zerovel)")
      ->required();

  std::string rollout_policy, scenario_file, kind = "circle";
  int n_agents = 10;
  double domain = 4.0;
  bool record_dists = false, sample_mode = false, greedy_mode = false;
  auto* rollout = app.add_subcommand("rollout", "run one scenario and export the trajectory");
  add_common(rollout, common);
  rollout->add_option("--policy", rollout_policy, "checkpoint path or baseline tag")
      ->required();
  rollout->add_option("--scenario-file", scenario_file, "scenario JSON (overrides --kind)");
  rollout->add_option("--kind", kind, "circle | pair_swaps | random");
  rollout->add_option("--agents", n_agents, "agent count");
  rollout->add_option("--domain", domain, "domain size for random scenarios");
  rollout->add_flag("--distributions", record_dists, "record per-step policy distributions");
  rollout->add_flag("--sample", sample_mode, "sample actions from the policy");
  rollout->add_flag("--greedy", greedy_mode, "greedy action selection (default)");

  int suite_agents = 2, suite_cases = 500;
  double suite_domain = 4.0;
  auto* gen_suite = app.add_subcommand("gen-suite", "generate a frozen test suite");
  add_common(gen_suite, common);
  gen_suite->add_option("--agents", suite_agents, "agents per scenario");
  gen_suite->add_option("--cases", suite_cases, "number of scenarios");
  gen_suite->add_option("--domain", suite_domain, "square domain side (m)");

  auto* gen_dataset = app.add_subcommand("gen-dataset", "generate the supervised dataset");
  add_common(gen_dataset, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (pretrain->parsed()) return cmd_pretrain(common);
    if (train->parsed()) return cmd_train(common, init_path);
    if (evalc->parsed()) return cmd_eval(common, suite_path, policy_specs);
    if (rollout->parsed())
      return cmd_rollout(common, rollout_policy, scenario_file, kind, n_agents, domain,
                         record_dists, sample_mode && !greedy_mode);
    if (gen_suite->parsed()) return cmd_gen_suite(common, suite_agents, suite_cases, suite_domain);
    if (gen_dataset->parsed()) return cmd_gen_dataset(common);
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
