// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "swarminfer/cnn.hpp"
#include "swarminfer/grid.hpp"

namespace swarminfer {

struct UavSpec {
  double mult_rate = 2.56e8;    // multiplications per second
  double memory_bytes = 1e9;    // weight-storage budget
  double compute_mults = 1e9;   // multiplication budget
};

// one classification request: which UAV executes each layer, and where the
// swarm hovered at each layer's hand-off (placements[j] is the placement in
// force when layer j receives its input)
struct AllocationPlan {
  int source_uav = 0;
  std::vector<int> layer_uav;
  std::vector<Placement> placements;
};

struct LatencyBreakdown {
  double source_transfer_s = 0.0;
  std::vector<double> hop_s;      // hop_s[j] carries layer j's output to layer j+1
  std::vector<double> compute_s;  // per UAV
  double total_s = 0.0;
  long long shared_bytes = 0;     // bytes shipped between UAVs (input + activations)
};

struct ValidateOptions {
  bool check_hot_cells = true;
};

// raw image shipment to the first executor; zero when the source executes it
double source_transfer_latency(const NetworkSpec& net, const GridConfig& grid,
                               const RadioParams& radio, const Placement& placement,
                               int source_uav, int first_executor);

// sum of c_j / e_i over the layers the plan puts on UAV `uav`
double compute_latency(const NetworkSpec& net, const AllocationPlan& plan, const UavSpec& uav_spec,
                       int uav);

// carry layer `from_layer`'s activations from one UAV to the next; zero when
// consecutive layers share an executor
double hop_transfer_latency(const NetworkSpec& net, const GridConfig& grid,
                            const RadioParams& radio, const Placement& placement, int from_layer,
                            int from_uav, int to_uav);

// feasibility of the whole plan: per-UAV memory and compute budgets, one real
// executor per layer, valid placements at every hand-off, optional hot-cell
// coverage; `why` names the binding constraint on failure
bool validate_plan(const NetworkSpec& net, const std::vector<UavSpec>& swarm,
                   const GridConfig& grid, const RadioParams& radio, const AllocationPlan& plan,
                   ValidateOptions opts = {}, std::string* why = nullptr);

// validates first (throws InfeasibleError), then sums source transfer, per-UAV
// compute, and inter-UAV hops
LatencyBreakdown total_latency(const NetworkSpec& net, const std::vector<UavSpec>& swarm,
                               const GridConfig& grid, const RadioParams& radio,
                               const AllocationPlan& plan, ValidateOptions opts = {});

}  // namespace swarminfer
