// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "swarminfer/cnn.hpp"
#include "swarminfer/grid.hpp"
#include "swarminfer/latency.hpp"
#include "swarminfer/rng.hpp"

namespace swarminfer {

struct EpisodeConfig {
  NetworkSpec network;
  std::vector<UavSpec> swarm;
  GridConfig grid;
  RadioParams radio;
  double qos_factor = 0.0;    // service weight S_f
  double hot_demand = 1.0;    // per-hot-cell demand at episode start
  double penalty_scale = 0.01;
  bool adjacency_limited = false;                // restrict moves to the 8-neighborhood
  std::optional<Placement> initial_placement;    // fixed spawn instead of random
};

struct Action {
  int allocate = 0;   // a1: place the cursor layer on the cursor UAV
  int move_cell = 0;  // a2: cell the cursor UAV flies to
};

struct StepInfo {
  int layer = 0;
  int uav = 0;
  bool cons1 = false;  // cursor layer allocated exactly once so far this window
  bool cons2 = false;  // move respected cell exclusivity
  bool cons3 = false;  // budgets could absorb the allocation (true when not allocating)
  bool allocated = false;
  double penalty_s = 0.0;  // unscaled latency charged by this step
  double qos_bonus = 0.0;
  Placement cells;  // placement after the move
};

struct StepResult {
  std::vector<double> state;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

struct StepRecord {
  int step = 0;
  int a1 = 0;
  int a2 = 0;
  double reward = 0.0;
  StepInfo info;
};

// one episode distributes one classification request: windows of N steps walk
// the layers in order, and within a window the cursor visits each UAV once
class SwarmEnv {
 public:
  SwarmEnv(EpisodeConfig cfg, std::uint64_t seed);

  std::vector<double> reset(bool keep_budgets = false);
  std::vector<double> reset_with_source(int source_uav, bool keep_budgets = false);
  StepResult step(const Action& action);

  std::vector<double> encode_state() const;

  int uav_count() const { return static_cast<int>(swarm_.size()); }
  int layer_count() const { return static_cast<int>(cfg_.network.layers.size()); }
  int cell_count() const { return cfg_.grid.cell_count(); }
  int steps_per_episode() const { return uav_count() * layer_count(); }
  int state_dim() const { return 2 * cell_count() + 4; }
  bool done() const { return done_; }
  int source() const { return source_; }
  int cursor_layer() const;
  int cursor_uav() const;
  const Placement& placement() const { return positions_; }
  const std::vector<double>& remaining_memory() const { return rem_mem_; }
  const std::vector<double>& remaining_compute() const { return rem_cmp_; }
  const std::vector<UavSpec>& swarm() const { return swarm_; }
  const EpisodeConfig& config() const { return cfg_; }

  double episode_reward() const { return ep_reward_; }
  double episode_penalty_s() const { return ep_penalty_s_; }
  long long episode_shared_bytes() const { return ep_shared_bytes_; }
  double episode_accuracy() const;  // fraction of steps with all constraints met
  double episode_coverage() const;  // fraction of hot-cell demand served
  const std::vector<StepRecord>& episode_steps() const { return records_; }

  // available when every layer was allocated exactly once
  std::optional<AllocationPlan> reconstruct_plan() const;

  // membership changes are only legal between episodes
  void add_uav(const UavSpec& uav);
  void remove_uav(int index);

  static bool check_cons1(const std::vector<bool>& window_allocations);
  static bool check_cons2(const std::vector<int>& visited_cells, int target_cell);
  static bool check_cons3(const LayerSpec& layer, double remaining_memory_bytes,
                          double remaining_compute_mults);

 private:
  void scatter();
  int hot_index(int cell) const;

  EpisodeConfig cfg_;
  std::vector<UavSpec> swarm_;
  Rng rng_;

  Placement positions_;
  std::vector<double> rem_mem_, rem_cmp_;
  std::vector<double> init_mem_, init_cmp_;
  std::vector<double> hot_unmet_;

  int step_idx_ = 0;
  bool done_ = true;
  bool started_ = false;
  int source_ = 0;

  std::vector<int> visited_window_;
  std::vector<bool> window_allocs_;
  std::vector<int> holder_;                 // first executor per layer, -1 if none
  std::vector<int> alloc_count_;            // effective allocations per layer
  std::vector<Placement> alloc_placement_;  // swarm placement at each allocation

  double ep_reward_ = 0.0;
  double ep_penalty_s_ = 0.0;
  long long ep_shared_bytes_ = 0;
  int ep_cons_ok_ = 0;
  std::vector<StepRecord> records_;
};

}  // namespace swarminfer
