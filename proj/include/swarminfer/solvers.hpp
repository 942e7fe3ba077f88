// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "swarminfer/latency.hpp"
#include "swarminfer/rng.hpp"

namespace swarminfer {

// one planning problem: a network to distribute, a swarm to hold it, and the
// geometry the hand-offs are priced against
struct InstanceSpec {
  NetworkSpec network;
  std::vector<UavSpec> swarm;
  GridConfig grid;
  RadioParams radio;
  Placement initial_placement;
  int source_uav = 0;
};

struct SolveResult {
  AllocationPlan plan;
  LatencyBreakdown breakdown;
  long long evaluated = 0;  // allocations priced during the search
};

struct RandomBaselineStats {
  int trials = 0;
  double mean_s = 0.0;
  double stddev_s = 0.0;
  double best_s = 0.0;
  double worst_s = 0.0;
};

// global optimum by enumeration: every allocation, with each hand-off stage
// placed independently at its best separation (stages decouple because each
// placement prices exactly one link); only viable for small instances
SolveResult exhaustive_oracle(const InstanceSpec& inst);

// coordinate descent between allocation and placement, started from the
// instance placement plus `restarts` random placements; each half-step is
// exhaustive, so the result never trails the greedy baseline
SolveResult alternating_solver(const InstanceSpec& inst, int restarts, int max_rounds,
                               std::uint64_t seed);

// myopic allocation over the held initial placement: per layer, the cheapest
// in-budget UAV counting its hand-off and compute time
SolveResult greedy_solver(const InstanceSpec& inst);

// uniformly random feasible allocations and placements, summarized over trials
RandomBaselineStats random_baseline(const InstanceSpec& inst, int trials, std::uint64_t seed);

// exhaustive best allocation for frozen per-stage placements (lexicographically
// first among optima); nullopt when no allocation fits the budgets
std::optional<std::vector<int>> best_allocation_for_placements(
    const InstanceSpec& inst, const std::vector<Placement>& placements, double* total = nullptr);

// per-stage optimal placements for a frozen allocation
std::vector<Placement> best_placements_for_allocation(const InstanceSpec& inst,
                                                      const std::vector<int>& layer_uav);

// uniformly random valid placement (hot cells covered, one UAV per cell)
Placement random_placement(const GridConfig& grid, int uavs, Rng& rng);

// tightest formation covering the hot cells; uav-to-cell assignment randomized
Placement formation_placement(const GridConfig& grid, int uavs, Rng& rng);

// small solvable problem for cross-checking solvers against each other
InstanceSpec random_instance(Rng& rng);

}  // namespace swarminfer
