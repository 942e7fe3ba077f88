// SPDX-License-Identifier: Apache-2.0
#include "swarminfer/latency.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "swarminfer/errors.hpp"

namespace swarminfer {

namespace {
double transfer_seconds(long long bytes, double rate_bits) {
  if (bytes == 0) return 0.0;
  if (rate_bits <= 0.0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(bytes) * 8.0 / rate_bits;
}
}  // namespace

double source_transfer_latency(const NetworkSpec& net, const GridConfig& grid,
                               const RadioParams& radio, const Placement& placement,
                               int source_uav, int first_executor) {
  if (source_uav == first_executor) return 0.0;
  return transfer_seconds(net.input_bytes,
                          data_rate(grid, radio, placement, source_uav, first_executor));
}

double compute_latency(const NetworkSpec& net, const AllocationPlan& plan, const UavSpec& uav_spec,
                       int uav) {
  if (uav_spec.mult_rate <= 0.0)
    throw std::invalid_argument("compute_latency: mult_rate must be positive");
  double total = 0.0;
  for (size_t j = 0; j < plan.layer_uav.size() && j < net.layers.size(); ++j)
    if (plan.layer_uav[j] == uav)
      total += static_cast<double>(compute_load(net.layers[j])) / uav_spec.mult_rate;
  return total;
}

double hop_transfer_latency(const NetworkSpec& net, const GridConfig& grid,
                            const RadioParams& radio, const Placement& placement, int from_layer,
                            int from_uav, int to_uav) {
  if (from_layer < 0 || from_layer >= static_cast<int>(net.layers.size()))
    throw std::invalid_argument("hop_transfer_latency: layer index out of range");
  if (from_uav == to_uav) return 0.0;
  return transfer_seconds(intermediate_bytes(net.layers[from_layer]),
                          data_rate(grid, radio, placement, from_uav, to_uav));
}

bool validate_plan(const NetworkSpec& net, const std::vector<UavSpec>& swarm,
                   const GridConfig& grid, const RadioParams& radio, const AllocationPlan& plan,
                   ValidateOptions opts, std::string* why) {
  (void)radio;
  const int n = static_cast<int>(swarm.size());
  const size_t L = net.layers.size();
  auto fail = [&](const std::string& reason) {
    if (why) *why = reason;
    return false;
  };

  if (n == 0) return fail("empty swarm");
  if (plan.source_uav < 0 || plan.source_uav >= n) return fail("source UAV outside the swarm");
  if (plan.layer_uav.size() != L)
    return fail("plan assigns " + std::to_string(plan.layer_uav.size()) + " layers, network has " +
                std::to_string(L));
  if (plan.placements.size() != L)
    return fail("plan carries " + std::to_string(plan.placements.size()) +
                " placements, expected one per layer");

  for (size_t j = 0; j < L; ++j)
    if (plan.layer_uav[j] < 0 || plan.layer_uav[j] >= n)
      return fail("layer " + std::to_string(j + 1) + " assigned outside the swarm");

  for (int i = 0; i < n; ++i) {
    double mem = 0.0, cmp = 0.0;
    for (size_t j = 0; j < L; ++j)
      if (plan.layer_uav[j] == i) {
        mem += static_cast<double>(layer_memory_bytes(net.layers[j]));
        cmp += static_cast<double>(compute_load(net.layers[j]));
      }
    if (mem > swarm[i].memory_bytes)
      return fail("memory budget exceeded on UAV " + std::to_string(i));
    if (cmp > swarm[i].compute_mults)
      return fail("compute budget exceeded on UAV " + std::to_string(i));
  }

  for (size_t j = 0; j < L; ++j) {
    const Placement& p = plan.placements[j];
    if (static_cast<int>(p.size()) != n)
      return fail("placement " + std::to_string(j + 1) + " sized for the wrong swarm");
    std::string why_placement;
    if (!placement_valid(grid, p, opts.check_hot_cells, &why_placement))
      return fail("placement " + std::to_string(j + 1) + ": " + why_placement);
  }

  if (why) why->clear();
  return true;
}

LatencyBreakdown total_latency(const NetworkSpec& net, const std::vector<UavSpec>& swarm,
                               const GridConfig& grid, const RadioParams& radio,
                               const AllocationPlan& plan, ValidateOptions opts) {
  std::string why;
  if (!validate_plan(net, swarm, grid, radio, plan, opts, &why))
    throw InfeasibleError("infeasible plan: " + why, why);

  LatencyBreakdown out;
  out.compute_s.assign(swarm.size(), 0.0);
  out.hop_s.assign(net.layers.size() > 0 ? net.layers.size() - 1 : 0, 0.0);

  out.source_transfer_s = source_transfer_latency(net, grid, radio, plan.placements[0],
                                                  plan.source_uav, plan.layer_uav[0]);
  if (plan.layer_uav[0] != plan.source_uav) out.shared_bytes += net.input_bytes;

  for (size_t i = 0; i < swarm.size(); ++i)
    out.compute_s[i] = compute_latency(net, plan, swarm[i], static_cast<int>(i));

  for (size_t j = 1; j < net.layers.size(); ++j) {
    const int prev = plan.layer_uav[j - 1];
    const int next = plan.layer_uav[j];
    out.hop_s[j - 1] = hop_transfer_latency(net, grid, radio, plan.placements[j],
                                            static_cast<int>(j - 1), prev, next);
    if (prev != next) out.shared_bytes += intermediate_bytes(net.layers[j - 1]);
  }

  out.total_s = out.source_transfer_s;
  for (double c : out.compute_s) out.total_s += c;
  for (double h : out.hop_s) out.total_s += h;
  return out;
}

}  // namespace swarminfer
