// Copyright 2026 The navlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <future>
#include <mutex>
#include <optional>
#include <thread>

#include "navlab/checkpoint.hpp"
#include "navlab/train.hpp"

namespace navlab {

struct TrainingConfig {
  double gamma = 0.97;
  double entropy_beta = 1e-4;
  double lr = 2e-5;
  int batch_size = 100;
  int k_horizon = 32;
  // Curriculum: phase 1 on few agents, phase 2 widens the range.
  int phase1_min_agents = 2;
  int phase1_max_agents = 4;
  int phase2_min_agents = 2;
  int phase2_max_agents = 10;
  std::uint64_t phase1_episodes = 50000;
  std::uint64_t phase2_episodes = 0;
  double domain_small = 4.0;
  double domain_large = 6.0;
  int large_domain_from = 10;  // n >= this uses the large domain
  int workers = 1;             // 1 = single-threaded deterministic mode
  int queue_capacity = 8;      // trajectory batches in flight (staleness bound)
  double p_learned = 0.8;
  double p_noncoop = 0.15;
  double p_zerovel = 0.05;
  std::uint64_t seed = 0;
  double grad_clip = 40.0;  // global norm; 0 disables
  bool vpref_scaled_discount = false;
  double dt = 0.2;
  std::uint64_t checkpoint_every = 10000;  // episodes
  double plateau_delta = 0.01;
  std::uint64_t plateau_window = 10000;
  std::size_t max_others = 19;
  // Supervised phase
  double supervised_lr = 1e-3;
  int supervised_epochs = 20;
  std::size_t supervised_examples = 50000;
};

struct TrainingLogRow {
  std::uint64_t episode = 0;
  double wall_time_s = 0.0;
  int phase = 1;
  int n_agents = 0;
  double mean_reward = 0.0;
  double value_loss = 0.0;
  double policy_loss = 0.0;
  double entropy = 0.0;
};

inline void write_training_log(const std::vector<TrainingLogRow>& rows,
                               const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open training log: " + path);
  os << "episode,wall_time_s,phase,n_agents,mean_reward,value_loss,policy_loss,entropy\n";
  char buf[256];
  for (const TrainingLogRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%llu,%.3f,%d,%d,%.6f,%.6f,%.6f,%.6f\n",
                  static_cast<unsigned long long>(r.episode), r.wall_time_s, r.phase,
                  r.n_agents, r.mean_reward, r.value_loss, r.policy_loss, r.entropy);
    os << buf;
  }
}

struct RunResult {
  Checkpoint checkpoint;
  std::vector<TrainingLogRow> log;
  bool diverged = false;
  std::string last_good_checkpoint;
};

template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

  // Blocks while full. Returns false once the queue is closed.
  bool push(T item) {
    std::unique_lock<std::mutex> lk(mu_);
    cv_push_.wait(lk, [&] { return closed_ || items_.size() < capacity_; });
    if (closed_) return false;
    items_.push_back(std::move(item));
    cv_pop_.notify_one();
    return true;
  }

  std::optional<T> pop() {
    std::unique_lock<std::mutex> lk(mu_);
    cv_pop_.wait(lk, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    cv_push_.notify_one();
    return item;
  }

  void close() {
    std::lock_guard<std::mutex> lk(mu_);
    closed_ = true;
    cv_push_.notify_all();
    cv_pop_.notify_all();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_push_;
  std::condition_variable cv_pop_;
  std::deque<T> items_;
  std::size_t capacity_;
  bool closed_ = false;
};

// Copy-on-publish parameter snapshots: the trainer is the only writer,
// everyone else reads immutable shared_ptr snapshots.
class ParamHub {
 public:
  explicit ParamHub(NetParams<float> initial) { publish(std::move(initial)); }

  void publish(NetParams<float> params) {
    auto snap = std::make_shared<const NetParams<float>>(std::move(params));
    std::lock_guard<std::mutex> lk(mu_);
    snapshot_ = std::move(snap);
    ++version_;
  }

  std::shared_ptr<const NetParams<float>> snapshot() const {
    std::lock_guard<std::mutex> lk(mu_);
    return snapshot_;
  }

  std::uint64_t version() const {
    std::lock_guard<std::mutex> lk(mu_);
    return version_;
  }

 private:
  mutable std::mutex mu_;
  std::shared_ptr<const NetParams<float>> snapshot_;
  std::uint64_t version_ = 0;
};

// Batches forward passes for the workers. Workers block on their future; the
// service picks up fresh parameter snapshots between batches.
class PredictionService {
 public:
  struct Request {
    ObservationSequence obs;
    std::promise<std::pair<std::vector<double>, double>> reply;
  };

  PredictionService(const ParamHub& hub, std::size_t queue_capacity)
      : hub_(hub), queue_(queue_capacity) {
    thread_ = std::thread([this] { run(); });
  }

  ~PredictionService() { stop(); }

  std::pair<std::vector<double>, double> predict(const ObservationSequence& obs) {
    Request req;
    req.obs = obs;
    auto fut = req.reply.get_future();
    if (!queue_.push(std::move(req))) throw std::runtime_error("prediction service stopped");
    return fut.get();
  }

  void stop() {
    queue_.close();
    if (thread_.joinable()) thread_.join();
  }

 private:
  void run() {
    while (true) {
      std::optional<Request> req = queue_.pop();
      if (!req) return;
      auto params = hub_.snapshot();
      try {
        ForwardResult<float> fr = forward(req->obs, *params);
        std::vector<double> dist(fr.policy.size());
        for (int i = 0; i < fr.policy.size(); ++i) dist[i] = static_cast<double>(fr.policy(i));
        req->reply.set_value({std::move(dist), static_cast<double>(fr.value)});
      } catch (...) {
        req->reply.set_exception(std::current_exception());
      }
    }
  }

  const ParamHub& hub_;
  BoundedQueue<Request> queue_;
  std::thread thread_;
};

namespace detail {

struct PhaseRange {
  int phase = 1;
  int min_agents = 2;
  int max_agents = 4;
};

inline double step_discount(const TrainingConfig& cfg, double v_pref) {
  return cfg.vpref_scaled_discount ? std::pow(cfg.gamma, cfg.dt * v_pref) : cfg.gamma;
}

// Training scenario: agent 0 always learned, others drawn from the policy mix.
inline ScenarioSpec make_training_scenario(const TrainingConfig& cfg, const PhaseRange& phase,
                                           std::mt19937_64& rng) {
  std::uniform_int_distribution<int> un(phase.min_agents, phase.max_agents);
  const int n = un(rng);
  const double domain = n >= cfg.large_domain_from ? cfg.domain_large : cfg.domain_small;
  for (;;) {
    try {
      ScenarioSpec spec = generate_random_scenario(static_cast<std::size_t>(n), domain, rng);
      spec.dt = cfg.dt;
      spec.rng_seed = rng();
      std::uniform_real_distribution<double> u(0.0, 1.0);
      spec.agents[0].policy_tag = PolicyTag::Learned;
      for (std::size_t i = 1; i < spec.agents.size(); ++i) {
        const double x = u(rng);
        if (x < cfg.p_learned)
          spec.agents[i].policy_tag = PolicyTag::Learned;
        else if (x < cfg.p_learned + cfg.p_noncoop)
          spec.agents[i].policy_tag = PolicyTag::NonCooperative;
        else
          spec.agents[i].policy_tag = PolicyTag::ZeroVelocity;
      }
      return spec;
    } catch (const std::runtime_error&) {
      // crowded draw, resample
    }
  }
}

// Mean accumulated reward across learned agents in one episode.
inline double learned_mean_reward(const EpisodeResult& result) {
  double sum = 0.0;
  int n = 0;
  const auto& agents = result.log.scenario.agents;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (agents[i].policy_tag != PolicyTag::Learned) continue;
    sum += result.log.outcomes[i].cumulative_reward;
    ++n;
  }
  return n > 0 ? sum / n : 0.0;
}

// Two-window plateau detector over the smoothed episode reward.
class PlateauDetector {
 public:
  PlateauDetector(std::uint64_t window, double delta) : window_(window), delta_(delta) {}

  bool add(double reward) {
    sum_ += reward;
    if (++count_ < window_) return false;
    const double avg = sum_ / static_cast<double>(window_);
    sum_ = 0.0;
    count_ = 0;
    const bool plateau = prev_.has_value() && std::abs(avg - *prev_) < delta_;
    prev_ = avg;
    return plateau;
  }

 private:
  std::uint64_t window_;
  double delta_;
  double sum_ = 0.0;
  std::uint64_t count_ = 0;
  std::optional<double> prev_;
};

}  // namespace detail

// Supervised initialization end to end: dataset generation + behavior cloning.
inline Checkpoint pretrain(const TrainingConfig& cfg, const NetConfig& net_cfg,
                           SupervisedStats* stats_out = nullptr) {
  std::mt19937_64 rng(cfg.seed);
  std::vector<SupervisedExample> dataset =
      generate_supervised_dataset(cfg.supervised_examples, rng, cfg.gamma, cfg.dt);
  Checkpoint ck;
  ck.params = init_params<float>(net_cfg, cfg.seed);
  SupervisedStats stats = supervised_init(dataset, ck.params, cfg.supervised_epochs,
                                          cfg.supervised_lr, cfg.batch_size, cfg.seed + 1);
  if (stats_out) *stats_out = stats;
  ck.adam = AdamState<float>::make(ck.params);
  return ck;
}

// Asynchronous (or, with workers == 1, single-threaded deterministic)
// actor-critic training. Returns the final checkpoint and the training log;
// periodic checkpoints land in out_dir when it is non-empty.
inline RunResult run_training(const TrainingConfig& cfg, Checkpoint initial,
                              const std::string& out_dir = "",
                              const std::atomic<bool>* stop_flag = nullptr) {
  RunResult result;
  result.checkpoint = std::move(initial);
  NetParams<float>& params = result.checkpoint.params;
  AdamState<float>& adam = result.checkpoint.adam;

  const std::uint64_t start_episode = result.checkpoint.episodes_trained;
  const std::uint64_t total_budget = cfg.phase1_episodes + cfg.phase2_episodes;
  if (start_episode >= total_budget) return result;

  ObsConfig obs_cfg;
  obs_cfg.max_others = cfg.max_others;

  auto save_periodic = [&](std::uint64_t episode) {
    if (out_dir.empty()) return;
    result.checkpoint.episodes_trained = episode;
    const std::string path = out_dir + "/checkpoint_" + std::to_string(episode) + ".bin";
    checkpoint_save(result.checkpoint, path);
    result.last_good_checkpoint = path;
  };

  detail::PlateauDetector plateau(cfg.plateau_window, cfg.plateau_delta);
  std::atomic<std::uint64_t> episode_counter{start_episode};
  std::atomic<int> current_phase{start_episode >= cfg.phase1_episodes ? 2 : 1};
  std::atomic<bool> phase1_done{start_episode >= cfg.phase1_episodes};
  std::atomic<bool> halt{false};

  auto phase_range = [&]() -> detail::PhaseRange {
    if (current_phase.load() == 1)
      return {1, cfg.phase1_min_agents, cfg.phase1_max_agents};
    return {2, cfg.phase2_min_agents, cfg.phase2_max_agents};
  };

  const auto t0 = std::chrono::steady_clock::now();
  auto wall_time = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  if (cfg.workers <= 1) {
    // Deterministic single-threaded mode: inline prediction, fixed ordering.
    // wall_time_s is written as 0 so logs are bit-reproducible.
    std::mt19937_64 rng(cfg.seed + 17);
    std::deque<ReturnTarget> pending;
    double last_vl = 0.0, last_pl = 0.0, last_ent = 0.0;
    auto snapshot = std::make_shared<NetParams<float>>(params);
    for (std::uint64_t ep = start_episode; ep < total_budget; ++ep) {
      if (stop_flag && stop_flag->load()) break;
      const detail::PhaseRange phase = phase_range();
      ScenarioSpec spec = detail::make_training_scenario(cfg, phase, rng);

      PolicyTable table;
      LearnedPolicy<float> policy;
      policy.params = snapshot;
      policy.mode = ActionMode::Sample;
      policy.obs_config = obs_cfg;
      table.learned = policy;

      EpisodeOptions opt;
      opt.collect_experiences = true;
      opt.obs_config = obs_cfg;
      opt.episode_id = ep;
      EpisodeResult er = run_episode(spec, table, opt);

      for (std::size_t i = 0; i < er.trajectories.size(); ++i) {
        if (er.trajectories[i].empty()) continue;
        const double g = detail::step_discount(cfg, spec.agents[i].v_pref);
        auto targets = build_return_targets(er.trajectories[i], params, g, cfg.k_horizon);
        for (auto& t : targets) pending.push_back(std::move(t));
      }

      while (static_cast<int>(pending.size()) >= cfg.batch_size) {
        std::vector<ReturnTarget> batch(pending.begin(), pending.begin() + cfg.batch_size);
        pending.erase(pending.begin(), pending.begin() + cfg.batch_size);
        try {
          A3CResult<float> r = a3c_loss_and_grads(batch, params, cfg.entropy_beta);
          clip_global_norm(r.grads, cfg.grad_clip);
          adam_update(params, r.grads, adam, cfg.lr);
          last_vl = r.value_loss;
          last_pl = r.policy_loss;
          last_ent = r.entropy;
          snapshot = std::make_shared<NetParams<float>>(params);
        } catch (const std::runtime_error&) {
          result.diverged = true;
          halt.store(true);
        }
      }
      if (halt.load()) break;

      TrainingLogRow row;
      row.episode = ep + 1;
      row.wall_time_s = 0.0;
      row.phase = phase.phase;
      row.n_agents = static_cast<int>(spec.agents.size());
      row.mean_reward = detail::learned_mean_reward(er);
      row.value_loss = last_vl;
      row.policy_loss = last_pl;
      row.entropy = last_ent;
      result.log.push_back(row);

      if (phase.phase == 1 &&
          (plateau.add(row.mean_reward) || ep + 1 >= cfg.phase1_episodes)) {
        current_phase.store(2);
        phase1_done.store(true);
        if (cfg.phase2_episodes == 0 && ep + 1 < cfg.phase1_episodes) break;
      }
      if (cfg.checkpoint_every > 0 && (ep + 1) % cfg.checkpoint_every == 0)
        save_periodic(ep + 1);
    }
    result.checkpoint.episodes_trained =
        start_episode + static_cast<std::uint64_t>(result.log.size());
  } else {
    // Async mode: workers -> experience queue -> trainer; workers query the
    // prediction service, the trainer publishes snapshots through the hub.
    ParamHub hub(params);
    PredictionService predictor(hub, static_cast<std::size_t>(cfg.queue_capacity) * 16);
    struct WorkerItem {
      std::vector<ReturnTarget> targets;
      TrainingLogRow row;
    };
    BoundedQueue<WorkerItem> experience_queue(static_cast<std::size_t>(cfg.queue_capacity));
    std::mutex log_mu;

    auto worker_fn = [&](int worker_id) {
      std::mt19937_64 rng(cfg.seed + 1000003ULL * static_cast<std::uint64_t>(worker_id + 1));
      while (!halt.load() && !(stop_flag && stop_flag->load())) {
        const std::uint64_t ep = episode_counter.fetch_add(1);
        if (ep >= total_budget) break;
        if (current_phase.load() == 1 && ep >= cfg.phase1_episodes) current_phase.store(2);
        try {
          const detail::PhaseRange phase = phase_range();
          ScenarioSpec spec = detail::make_training_scenario(cfg, phase, rng);
          auto snap = hub.snapshot();

          PolicyTable table;
          table.learned = [&](const std::vector<AgentState>& world, std::size_t ego,
                              std::mt19937_64& erng) -> PolicyDecision {
            const ObservationSequence obs = build_observation(world, ego, obs_cfg);
            auto [dist, value] = predictor.predict(obs);
            (void)value;
            const int idx = select_action(dist, ActionMode::Sample, erng);
            const ActionSet actions = build_action_set(world[ego].v_pref);
            return {actions[static_cast<std::size_t>(idx)], idx, std::move(dist)};
          };

          EpisodeOptions opt;
          opt.collect_experiences = true;
          opt.obs_config = obs_cfg;
          opt.episode_id = ep;
          EpisodeResult er = run_episode(spec, table, opt);

          WorkerItem item;
          for (std::size_t i = 0; i < er.trajectories.size(); ++i) {
            if (er.trajectories[i].empty()) continue;
            const double g = detail::step_discount(cfg, spec.agents[i].v_pref);
            auto targets = build_return_targets(er.trajectories[i], *snap, g, cfg.k_horizon);
            for (auto& t : targets) item.targets.push_back(std::move(t));
          }
          item.row.episode = ep + 1;
          item.row.phase = phase.phase;
          item.row.n_agents = static_cast<int>(spec.agents.size());
          item.row.mean_reward = detail::learned_mean_reward(er);
          if (!experience_queue.push(std::move(item))) break;
        } catch (const std::exception&) {
          // worker restarts on the next episode
        }
      }
    };

    std::atomic<std::uint64_t> episodes_logged{start_episode};
    auto trainer_fn = [&] {
      std::vector<ReturnTarget> pending;
      double last_vl = 0.0, last_pl = 0.0, last_ent = 0.0;
      while (true) {
        std::optional<WorkerItem> item = experience_queue.pop();
        if (!item) break;
        for (auto& t : item->targets) pending.push_back(std::move(t));
        while (static_cast<int>(pending.size()) >= cfg.batch_size) {
          std::vector<ReturnTarget> batch(pending.begin(), pending.begin() + cfg.batch_size);
          pending.erase(pending.begin(), pending.begin() + cfg.batch_size);
          try {
            A3CResult<float> r = a3c_loss_and_grads(batch, params, cfg.entropy_beta);
            clip_global_norm(r.grads, cfg.grad_clip);
            adam_update(params, r.grads, adam, cfg.lr);
            last_vl = r.value_loss;
            last_pl = r.policy_loss;
            last_ent = r.entropy;
            hub.publish(params);
          } catch (const std::runtime_error&) {
            result.diverged = true;
            halt.store(true);
            return;
          }
        }
        item->row.wall_time_s = wall_time();
        item->row.value_loss = last_vl;
        item->row.policy_loss = last_pl;
        item->row.entropy = last_ent;
        {
          std::lock_guard<std::mutex> lk(log_mu);
          result.log.push_back(item->row);
        }
        const std::uint64_t done = episodes_logged.fetch_add(1) + 1;
        if (current_phase.load() == 1 && plateau.add(item->row.mean_reward))
          current_phase.store(2);
        if (cfg.checkpoint_every > 0 && done % cfg.checkpoint_every == 0) {
          std::lock_guard<std::mutex> lk(log_mu);
          save_periodic(done);
        }
      }
    };

    std::vector<std::thread> workers;
    for (int w = 0; w < cfg.workers; ++w) workers.emplace_back(worker_fn, w);
    std::thread trainer(trainer_fn);
    for (auto& w : workers) w.join();
    experience_queue.close();
    trainer.join();
    predictor.stop();
    std::sort(result.log.begin(), result.log.end(),
              [](const TrainingLogRow& a, const TrainingLogRow& b) {
                return a.episode < b.episode;
              });
    result.checkpoint.episodes_trained = episodes_logged.load();
  }
  return result;
}

}  // namespace navlab
