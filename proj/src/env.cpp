// SPDX-License-Identifier: Apache-2.0
#include "swarminfer/env.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "swarminfer/errors.hpp"

namespace swarminfer {

SwarmEnv::SwarmEnv(EpisodeConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)), swarm_(cfg_.swarm), rng_(seed) {
  validate_network(cfg_.network);
  validate_grid(cfg_.grid);
  validate_radio(cfg_.radio);
  if (swarm_.empty()) throw ConfigError("swarm must contain at least one UAV");
  if (uav_count() > cell_count())
    throw ConfigError("swarm of " + std::to_string(uav_count()) + " cannot fit a grid of " +
                      std::to_string(cell_count()) + " cells");
  for (const UavSpec& u : swarm_)
    if (u.mult_rate <= 0.0 || u.memory_bytes <= 0.0 || u.compute_mults <= 0.0)
      throw ConfigError("UAV capacities must be positive");
  if (cfg_.initial_placement) {
    std::string why;
    if (static_cast<int>(cfg_.initial_placement->size()) != uav_count() ||
        !placement_valid(cfg_.grid, *cfg_.initial_placement, false, &why))
      throw ConfigError("initial placement invalid: " + why);
  }
  if (cfg_.penalty_scale < 0.0) throw ConfigError("penalty_scale must be non-negative");
  if (cfg_.qos_factor < 0.0) throw ConfigError("qos_factor must be non-negative");
}

void SwarmEnv::scatter() {
  if (cfg_.initial_placement && static_cast<int>(cfg_.initial_placement->size()) == uav_count()) {
    positions_ = *cfg_.initial_placement;
    return;
  }
  // uniform draw of distinct cells
  positions_.clear();
  std::vector<int> pool(cell_count());
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < uav_count(); ++i) {
    const int pick = rng_.index(static_cast<int>(pool.size()));
    positions_.push_back(pool[pick]);
    pool.erase(pool.begin() + pick);
  }
}

std::vector<double> SwarmEnv::reset(bool keep_budgets) {
  return reset_with_source(rng_.index(uav_count()), keep_budgets);
}

std::vector<double> SwarmEnv::reset_with_source(int source_uav, bool keep_budgets) {
  if (source_uav < 0 || source_uav >= uav_count())
    throw std::invalid_argument("source UAV outside the swarm");
  scatter();
  source_ = source_uav;
  if (!keep_budgets || rem_mem_.size() != swarm_.size()) {
    rem_mem_.clear();
    rem_cmp_.clear();
    for (const UavSpec& u : swarm_) {
      rem_mem_.push_back(u.memory_bytes);
      rem_cmp_.push_back(u.compute_mults);
    }
  }
  init_mem_.clear();
  init_cmp_.clear();
  for (const UavSpec& u : swarm_) {
    init_mem_.push_back(u.memory_bytes);
    init_cmp_.push_back(u.compute_mults);
  }
  hot_unmet_.assign(cfg_.grid.hot_cells.size(), cfg_.hot_demand);

  step_idx_ = 0;
  done_ = false;
  started_ = true;
  visited_window_.clear();
  window_allocs_.clear();
  holder_.assign(layer_count(), -1);
  alloc_count_.assign(layer_count(), 0);
  alloc_placement_.assign(layer_count(), Placement{});
  ep_reward_ = 0.0;
  ep_penalty_s_ = 0.0;
  ep_shared_bytes_ = 0;
  ep_cons_ok_ = 0;
  records_.clear();
  return encode_state();
}

int SwarmEnv::cursor_layer() const {
  const int idx = std::min(step_idx_, steps_per_episode() - 1);
  return idx / uav_count();
}

int SwarmEnv::cursor_uav() const {
  const int idx = std::min(step_idx_, steps_per_episode() - 1);
  return idx % uav_count();
}

int SwarmEnv::hot_index(int cell) const {
  for (size_t h = 0; h < cfg_.grid.hot_cells.size(); ++h)
    if (cfg_.grid.hot_cells[h] == cell) return static_cast<int>(h);
  return -1;
}

bool SwarmEnv::check_cons1(const std::vector<bool>& window_allocations) {
  int count = 0;
  for (bool a : window_allocations) count += a ? 1 : 0;
  return count == 1;
}

bool SwarmEnv::check_cons2(const std::vector<int>& visited_cells, int target_cell) {
  return std::find(visited_cells.begin(), visited_cells.end(), target_cell) ==
         visited_cells.end();
}

bool SwarmEnv::check_cons3(const LayerSpec& layer, double remaining_memory_bytes,
                           double remaining_compute_mults) {
  return static_cast<double>(layer_memory_bytes(layer)) <= remaining_memory_bytes &&
         static_cast<double>(compute_load(layer)) <= remaining_compute_mults;
}

StepResult SwarmEnv::step(const Action& action) {
  if (done_ || !started_) throw std::logic_error("step on a finished episode; call reset first");
  const int layer = step_idx_ / uav_count();
  const int uav = step_idx_ % uav_count();
  if (action.move_cell < 0 || action.move_cell >= cell_count())
    throw std::invalid_argument("move target outside the grid");

  if (step_idx_ % uav_count() == 0) {
    visited_window_.clear();
    window_allocs_.clear();
  }

  // move first: transfers of this step see the post-move geometry
  const int target = action.move_cell;
  bool occupied = false;
  for (int k = 0; k < uav_count(); ++k)
    if (k != uav && positions_[k] == target) occupied = true;
  const bool reachable =
      !cfg_.adjacency_limited || cells_adjacent(cfg_.grid, positions_[uav], target);
  const bool cons2 = check_cons2(visited_window_, target) && !occupied && reachable;
  if (!occupied && reachable) positions_[uav] = target;
  visited_window_.push_back(positions_[uav]);

  // service pass: landing on a hot cell serves one unit of its demand
  double qos = 0.0;
  const int h = hot_index(positions_[uav]);
  if (h >= 0) {
    hot_unmet_[h] = std::max(0.0, hot_unmet_[h] - 1.0);
    const double unmet = std::accumulate(hot_unmet_.begin(), hot_unmet_.end(), 0.0);
    qos = cfg_.qos_factor / (1.0 + unmet);
  }

  // allocation attempt
  bool cons3 = true;
  bool allocated = false;
  double penalty_s = 0.0;
  if (action.allocate) {
    const LayerSpec& ls = cfg_.network.layers[layer];
    cons3 = check_cons3(ls, rem_mem_[uav], rem_cmp_[uav]);
    if (cons3) {
      allocated = true;
      rem_mem_[uav] -= static_cast<double>(layer_memory_bytes(ls));
      rem_cmp_[uav] -= static_cast<double>(compute_load(ls));
      if (holder_[layer] < 0) {
        holder_[layer] = uav;
        alloc_placement_[layer] = positions_;
      }
      alloc_count_[layer] += 1;

      penalty_s = static_cast<double>(compute_load(ls)) / swarm_[uav].mult_rate;
      if (layer == 0) {
        if (uav != source_) {
          penalty_s += source_transfer_latency(cfg_.network, cfg_.grid, cfg_.radio, positions_,
                                               source_, uav);
          ep_shared_bytes_ += cfg_.network.input_bytes;
        }
      } else if (holder_[layer - 1] >= 0 && holder_[layer - 1] != uav) {
        penalty_s += hop_transfer_latency(cfg_.network, cfg_.grid, cfg_.radio, positions_,
                                          layer - 1, holder_[layer - 1], uav);
        ep_shared_bytes_ += intermediate_bytes(cfg_.network.layers[layer - 1]);
      }
    }
  }
  window_allocs_.push_back(allocated);
  const bool cons1 = check_cons1(window_allocs_);

  const double reward =
      (cons1 && cons2 && cons3 ? 1.0 : 0.0) - cfg_.penalty_scale * penalty_s + qos;

  ep_reward_ += reward;
  ep_penalty_s_ += penalty_s;
  if (cons1 && cons2 && cons3) ++ep_cons_ok_;

  StepResult out;
  out.info.layer = layer;
  out.info.uav = uav;
  out.info.cons1 = cons1;
  out.info.cons2 = cons2;
  out.info.cons3 = cons3;
  out.info.allocated = allocated;
  out.info.penalty_s = penalty_s;
  out.info.qos_bonus = qos;
  out.info.cells = positions_;
  out.reward = reward;

  StepRecord rec;
  rec.step = step_idx_;
  rec.a1 = action.allocate ? 1 : 0;
  rec.a2 = action.move_cell;
  rec.reward = reward;
  rec.info = out.info;
  records_.push_back(std::move(rec));

  ++step_idx_;
  done_ = (step_idx_ >= steps_per_episode());
  out.done = done_;
  out.state = encode_state();
  return out;
}

std::vector<double> SwarmEnv::encode_state() const {
  std::vector<double> s;
  s.reserve(state_dim());
  const int layer = cursor_layer();
  const int uav = cursor_uav();
  s.push_back(static_cast<double>(layer + 1) / layer_count());
  s.push_back(static_cast<double>(uav + 1) / uav_count());
  s.push_back(init_mem_.empty() ? 1.0 : rem_mem_[uav] / init_mem_[uav]);
  s.push_back(init_cmp_.empty() ? 1.0 : rem_cmp_[uav] / init_cmp_[uav]);
  std::vector<double> occupancy(cell_count(), 0.0);
  for (int c : positions_) occupancy[c] = 1.0;
  s.insert(s.end(), occupancy.begin(), occupancy.end());
  std::vector<double> hot(cell_count(), 0.0);
  for (int c : cfg_.grid.hot_cells) hot[c] = 1.0;
  s.insert(s.end(), hot.begin(), hot.end());
  return s;
}

double SwarmEnv::episode_accuracy() const {
  if (records_.empty()) return 0.0;
  return static_cast<double>(ep_cons_ok_) / static_cast<double>(records_.size());
}

double SwarmEnv::episode_coverage() const {
  if (hot_unmet_.empty()) return 1.0;
  const double total = cfg_.hot_demand * static_cast<double>(hot_unmet_.size());
  if (total <= 0.0) return 1.0;
  const double unmet = std::accumulate(hot_unmet_.begin(), hot_unmet_.end(), 0.0);
  return (total - unmet) / total;
}

std::optional<AllocationPlan> SwarmEnv::reconstruct_plan() const {
  AllocationPlan plan;
  plan.source_uav = source_;
  for (int j = 0; j < layer_count(); ++j) {
    if (alloc_count_[j] != 1) return std::nullopt;
    plan.layer_uav.push_back(holder_[j]);
    plan.placements.push_back(alloc_placement_[j]);
  }
  return plan;
}

void SwarmEnv::add_uav(const UavSpec& uav) {
  if (started_ && !done_) throw std::logic_error("cannot add a UAV mid-episode");
  if (uav.mult_rate <= 0.0 || uav.memory_bytes <= 0.0 || uav.compute_mults <= 0.0)
    throw std::invalid_argument("UAV capacities must be positive");
  if (uav_count() + 1 > cell_count())
    throw InfeasibleError("grid cannot hold another UAV", "placement");
  swarm_.push_back(uav);
  rem_mem_.clear();  // budgets re-derived on next reset
}

void SwarmEnv::remove_uav(int index) {
  if (index < 0 || index >= uav_count()) throw std::invalid_argument("no such UAV");
  if (started_ && !done_) throw std::logic_error("cannot remove a UAV mid-episode");
  if (uav_count() == 1) throw InfeasibleError("cannot empty the swarm", "swarm");
  swarm_.erase(swarm_.begin() + index);
  rem_mem_.clear();
}

}  // namespace swarminfer
