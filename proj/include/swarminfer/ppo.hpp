// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "swarminfer/env.hpp"
#include "swarminfer/policy.hpp"

namespace swarminfer {

struct TrainConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double learning_rate = 2.5e-4;
  int batch_size = 512;      // rollout steps per update
  int minibatches = 4;
  int epochs = 4;
  double clip = 0.2;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  double max_grad_norm = 0.5;
  bool normalize_advantages = true;
  long long total_steps = 200000;
  // fixed flight paths: placements per layer window (or a single held placement);
  // the movement head is bypassed and excluded from the objective
  std::optional<std::vector<Placement>> static_schedule;
};

// generalized advantage estimation over a rollout that may span episodes;
// dones[t] marks that step t finished its episode
void compute_gae(const std::vector<double>& rewards, const std::vector<double>& values,
                 const std::vector<std::uint8_t>& dones, double last_value, double gamma,
                 double lambda, std::vector<double>* advantages, std::vector<double>* returns);

struct RolloutBuffer {
  Eigen::MatrixXd states;  // state_dim x capacity
  std::vector<int> a1, a2;
  std::vector<double> logp, rewards, values;
  std::vector<std::uint8_t> dones;
  int size = 0;

  explicit RolloutBuffer(int state_dim, int capacity);
  void clear();
  void push(const Eigen::VectorXd& state, int alloc, int move, double logp_joint, double reward,
            double value, bool done);
  bool full() const { return size == static_cast<int>(states.cols()); }
};

struct MiniBatch {
  Eigen::MatrixXd states;
  std::vector<int> a1, a2;
  Eigen::VectorXd logp_old, advantages, returns;
};

struct LossParts {
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
};

// clipped-surrogate objective with value and entropy terms; when grad is given
// it receives d(total)/d(params); move_head=false drops the movement head from
// the log-probability and entropy (fixed-path training)
LossParts ppo_loss(const PolicyNet& net, const MiniBatch& mb, double clip, double value_coef,
                   double entropy_coef, bool move_head, Eigen::VectorXd* grad);

// rescales grad to max_norm when it is longer; returns the pre-clip norm
double clip_norm(Eigen::VectorXd& grad, double max_norm);

struct Adam {
  explicit Adam(int n);
  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr);
  Eigen::VectorXd m, v;
  long long t = 0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
};

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
};

UpdateStats ppo_update(PolicyNet& net, Adam& opt, const RolloutBuffer& buffer, double last_value,
                       const TrainConfig& cfg, Rng& rng);

struct EpisodeStat {
  int episode = 0;
  int steps = 0;
  int uavs = 0;
  double reward = 0.0;
  double penalty_s = 0.0;
  double accuracy = 0.0;
  double coverage = 0.0;
  long long shared_bytes = 0;
  bool plan_complete = false;
  double latency_s = 0.0;  // reconstructed plan latency when complete
};

struct TrainHooks {
  std::function<void(int episode, SwarmEnv& env)> before_episode;
  std::function<void(int episode, const SwarmEnv& env, const EpisodeStat& stat)> after_episode;
  std::function<bool(const std::vector<EpisodeStat>&)> should_stop;
};

struct TrainResult {
  std::vector<EpisodeStat> episodes;
  long long env_steps = 0;
  int updates = 0;
  UpdateStats last_update;
};

// on-policy loop: roll the environment into the buffer, update when full,
// repeat until the step budget (episodes always run to completion)
TrainResult train(PolicyNet& net, SwarmEnv& env, const TrainConfig& cfg, std::uint64_t seed,
                  const TrainHooks& hooks = {});

struct EvalStats {
  int episodes = 0;
  double mean_reward = 0.0;
  double mean_accuracy = 0.0;
  double mean_coverage = 0.0;
  double mean_penalty_s = 0.0;
  int complete_plans = 0;
  double mean_latency_s = 0.0;  // over episodes with a complete plan
};

EvalStats evaluate_policy(const PolicyNet& net, SwarmEnv& env, int episodes, bool deterministic,
                          std::uint64_t seed,
                          const std::optional<std::vector<Placement>>& schedule = std::nullopt);

// schedule placements must be valid and sized to the swarm (throws ConfigError)
void validate_schedule(const std::vector<Placement>& schedule, const GridConfig& grid, int uavs);

}  // namespace swarminfer
