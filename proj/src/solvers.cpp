// SPDX-License-Identifier: Apache-2.0
#include "swarminfer/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "swarminfer/errors.hpp"

namespace swarminfer {

namespace {

constexpr long long kSearchCap = 10'000'000;

void check_instance(const InstanceSpec& inst) {
  if (inst.swarm.empty()) throw ConfigError("instance has no UAVs");
  if (inst.network.layers.empty()) throw ConfigError("instance network has no layers");
  if (inst.source_uav < 0 || inst.source_uav >= static_cast<int>(inst.swarm.size()))
    throw ConfigError("source UAV outside the swarm");
  validate_grid(inst.grid);
  validate_radio(inst.radio);
}

long long arrangement_count(int cells, int uavs) {
  long long n = 1;
  for (int i = 0; i < uavs; ++i) {
    n *= cells - i;
    if (n <= 0 || n > kSearchCap) return n <= 0 ? 0 : kSearchCap + 1;
  }
  return n;
}

// visit every valid placement in lexicographic order
void each_valid_placement(const GridConfig& grid, int uavs,
                          const std::function<void(const Placement&)>& visit) {
  Placement p(uavs, -1);
  std::vector<bool> used(grid.cell_count(), false);
  std::function<void(int)> rec = [&](int i) {
    if (i == uavs) {
      if (placement_valid(grid, p, true, nullptr)) visit(p);
      return;
    }
    for (int c = 0; c < grid.cell_count(); ++c) {
      if (used[c]) continue;
      used[c] = true;
      p[i] = c;
      rec(i + 1);
      used[c] = false;
    }
  };
  rec(0);
}

// tightest valid placement for every UAV pair, plus a fallback placement for
// stages that move no data
struct PairPlacements {
  std::vector<Placement> best;  // index a * n + b
  std::vector<double> dist;
  Placement rest;
};

PairPlacements tabulate_pairs(const InstanceSpec& inst) {
  const int n = static_cast<int>(inst.swarm.size());
  if (arrangement_count(inst.grid.cell_count(), n) > kSearchCap)
    throw ConfigError("grid too large for exhaustive placement search");
  PairPlacements table;
  table.best.resize(static_cast<std::size_t>(n) * n);
  table.dist.assign(static_cast<std::size_t>(n) * n, std::numeric_limits<double>::infinity());
  each_valid_placement(inst.grid, n, [&](const Placement& p) {
    if (table.rest.empty()) table.rest = p;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        const double d = cell_distance(inst.grid, p[a], p[b]);
        if (d < table.dist[a * n + b]) {
          table.dist[a * n + b] = d;
          table.dist[b * n + a] = d;
          table.best[a * n + b] = p;
          table.best[b * n + a] = p;
        }
      }
  });
  if (table.rest.empty())
    throw InfeasibleError("no valid placement exists for this swarm and grid", "placement");
  return table;
}

// stage j ships the image (j = 0) or layer j's input activations
long long stage_bytes(const NetworkSpec& net, int stage) {
  return stage == 0 ? net.input_bytes : intermediate_bytes(net.layers[stage - 1]);
}

int stage_from(const InstanceSpec& inst, const std::vector<int>& alloc, int stage) {
  return stage == 0 ? inst.source_uav : alloc[stage - 1];
}

double price(const InstanceSpec& inst, const std::vector<int>& alloc,
             const std::vector<Placement>& placements) {
  const int layers = static_cast<int>(inst.network.layers.size());
  double total = 0.0;
  for (int j = 0; j < layers; ++j)
    total += static_cast<double>(compute_load(inst.network.layers[j])) /
             inst.swarm[alloc[j]].mult_rate;
  for (int j = 0; j < layers; ++j) {
    const int from = stage_from(inst, alloc, j);
    const int to = alloc[j];
    if (from == to) continue;
    total += static_cast<double>(stage_bytes(inst.network, j)) * 8.0 /
             data_rate(inst.grid, inst.radio, placements[j], from, to);
  }
  return total;
}

std::vector<Placement> placements_for(const InstanceSpec& inst, const PairPlacements& table,
                                      const std::vector<int>& alloc) {
  const int n = static_cast<int>(inst.swarm.size());
  const int layers = static_cast<int>(inst.network.layers.size());
  std::vector<Placement> out(layers);
  for (int j = 0; j < layers; ++j) {
    const int from = stage_from(inst, alloc, j);
    const int to = alloc[j];
    out[j] = from == to ? table.rest : table.best[from * n + to];
  }
  return out;
}

struct AllocationSearch {
  std::optional<std::vector<int>> alloc;
  double total = std::numeric_limits<double>::infinity();
  long long evaluated = 0;
  long long memory_blocked = 0;
  long long compute_blocked = 0;
};

// enumerate allocations lexicographically; `stage_cost(alloc, j)` prices stage
// j under whatever placement policy the caller fixes
AllocationSearch search_allocations(
    const InstanceSpec& inst,
    const std::function<double(const std::vector<int>&, int)>& stage_cost) {
  const int n = static_cast<int>(inst.swarm.size());
  const int layers = static_cast<int>(inst.network.layers.size());
  if (std::pow(n, layers) > static_cast<double>(kSearchCap))
    throw ConfigError("too many allocations for exhaustive search");

  std::vector<double> layer_mem(layers), layer_cmp(layers);
  for (int j = 0; j < layers; ++j) {
    layer_mem[j] = static_cast<double>(layer_memory_bytes(inst.network.layers[j]));
    layer_cmp[j] = static_cast<double>(compute_load(inst.network.layers[j]));
  }

  AllocationSearch out;
  std::vector<int> alloc(layers, 0);
  std::vector<double> mem(n), cmp(n);
  while (true) {
    std::fill(mem.begin(), mem.end(), 0.0);
    std::fill(cmp.begin(), cmp.end(), 0.0);
    for (int j = 0; j < layers; ++j) {
      mem[alloc[j]] += layer_mem[j];
      cmp[alloc[j]] += layer_cmp[j];
    }
    bool mem_ok = true, cmp_ok = true;
    for (int i = 0; i < n && mem_ok && cmp_ok; ++i) {
      if (mem[i] > inst.swarm[i].memory_bytes) mem_ok = false;
      else if (cmp[i] > inst.swarm[i].compute_mults) cmp_ok = false;
    }
    if (!mem_ok) {
      ++out.memory_blocked;
    } else if (!cmp_ok) {
      ++out.compute_blocked;
    } else {
      ++out.evaluated;
      double total = 0.0;
      for (int j = 0; j < layers; ++j)
        total += layer_cmp[j] / inst.swarm[alloc[j]].mult_rate + stage_cost(alloc, j);
      if (total < out.total) {
        out.total = total;
        out.alloc = alloc;
      }
    }
    int j = layers - 1;
    while (j >= 0 && alloc[j] == n - 1) alloc[j--] = 0;
    if (j < 0) break;
    ++alloc[j];
  }
  return out;
}

[[noreturn]] void report_blocked(const AllocationSearch& search) {
  const char* constraint = search.memory_blocked >= search.compute_blocked ? "memory" : "compute";
  throw InfeasibleError(std::string("no allocation fits the per-UAV ") + constraint + " budgets",
                        constraint);
}

SolveResult finish(const InstanceSpec& inst, const std::vector<int>& alloc,
                   std::vector<Placement> placements, long long evaluated) {
  SolveResult res;
  res.plan.source_uav = inst.source_uav;
  res.plan.layer_uav = alloc;
  res.plan.placements = std::move(placements);
  res.breakdown = total_latency(inst.network, inst.swarm, inst.grid, inst.radio, res.plan);
  res.evaluated = evaluated;
  return res;
}

}  // namespace

SolveResult exhaustive_oracle(const InstanceSpec& inst) {
  check_instance(inst);
  const PairPlacements table = tabulate_pairs(inst);
  const int n = static_cast<int>(inst.swarm.size());
  auto stage_cost = [&](const std::vector<int>& alloc, int j) {
    const int from = stage_from(inst, alloc, j);
    const int to = alloc[j];
    if (from == to) return 0.0;
    return static_cast<double>(stage_bytes(inst.network, j)) * 8.0 /
           data_rate(inst.grid, inst.radio, table.best[from * n + to], from, to);
  };
  AllocationSearch search = search_allocations(inst, stage_cost);
  if (!search.alloc) report_blocked(search);
  return finish(inst, *search.alloc, placements_for(inst, table, *search.alloc),
                search.evaluated);
}

std::optional<std::vector<int>> best_allocation_for_placements(
    const InstanceSpec& inst, const std::vector<Placement>& placements, double* total) {
  check_instance(inst);
  if (placements.size() != inst.network.layers.size())
    throw ConfigError("expected one placement per layer");
  auto stage_cost = [&](const std::vector<int>& alloc, int j) {
    const int from = stage_from(inst, alloc, j);
    const int to = alloc[j];
    if (from == to) return 0.0;
    return static_cast<double>(stage_bytes(inst.network, j)) * 8.0 /
           data_rate(inst.grid, inst.radio, placements[j], from, to);
  };
  AllocationSearch search = search_allocations(inst, stage_cost);
  if (total) *total = search.total;
  return search.alloc;
}

std::vector<Placement> best_placements_for_allocation(const InstanceSpec& inst,
                                                      const std::vector<int>& layer_uav) {
  check_instance(inst);
  if (layer_uav.size() != inst.network.layers.size())
    throw ConfigError("expected one UAV per layer");
  return placements_for(inst, tabulate_pairs(inst), layer_uav);
}

SolveResult alternating_solver(const InstanceSpec& inst, int restarts, int max_rounds,
                               std::uint64_t seed) {
  check_instance(inst);
  if (max_rounds < 1) throw ConfigError("alternating solver needs at least one round");
  std::string why;
  if (!placement_valid(inst.grid, inst.initial_placement, true, &why))
    throw InfeasibleError("instance placement invalid: " + why, "placement");
  const PairPlacements table = tabulate_pairs(inst);
  const int layers = static_cast<int>(inst.network.layers.size());
  Rng rng(Rng::derive(seed, 0xa17));

  std::optional<std::vector<int>> best_alloc;
  std::vector<Placement> best_placements;
  double best_total = std::numeric_limits<double>::infinity();
  long long evaluated = 0;

  auto run = [&](const Placement& start) {
    std::vector<Placement> placements(layers, start);
    double run_total = std::numeric_limits<double>::infinity();
    std::optional<std::vector<int>> run_alloc;
    for (int round = 0; round < max_rounds; ++round) {
      double alloc_total = 0.0;
      auto alloc = best_allocation_for_placements(inst, placements, &alloc_total);
      evaluated += 1;
      if (!alloc) {
        // budgets do not depend on placements, so surface the blocker once
        AllocationSearch search =
            search_allocations(inst, [](const std::vector<int>&, int) { return 0.0; });
        report_blocked(search);
      }
      placements = placements_for(inst, table, *alloc);
      const double total = price(inst, *alloc, placements);
      if (total < run_total - 1e-15) {
        run_total = total;
        run_alloc = *alloc;
      } else {
        break;
      }
    }
    if (run_alloc && run_total < best_total) {
      best_total = run_total;
      best_alloc = *run_alloc;
      best_placements = placements_for(inst, table, *run_alloc);
    }
  };

  run(inst.initial_placement);
  for (int r = 0; r < restarts; ++r)
    run(random_placement(inst.grid, static_cast<int>(inst.swarm.size()), rng));
  if (!best_alloc) {
    AllocationSearch search =
        search_allocations(inst, [](const std::vector<int>&, int) { return 0.0; });
    report_blocked(search);
  }
  return finish(inst, *best_alloc, std::move(best_placements), evaluated);
}

SolveResult greedy_solver(const InstanceSpec& inst) {
  check_instance(inst);
  std::string why;
  if (!placement_valid(inst.grid, inst.initial_placement, true, &why))
    throw InfeasibleError("instance placement invalid: " + why, "placement");

  const int n = static_cast<int>(inst.swarm.size());
  const int layers = static_cast<int>(inst.network.layers.size());
  std::vector<double> rem_mem(n), rem_cmp(n);
  for (int i = 0; i < n; ++i) {
    rem_mem[i] = inst.swarm[i].memory_bytes;
    rem_cmp[i] = inst.swarm[i].compute_mults;
  }

  std::vector<int> alloc;
  long long evaluated = 0;
  for (int j = 0; j < layers; ++j) {
    const double need_mem = static_cast<double>(layer_memory_bytes(inst.network.layers[j]));
    const double need_cmp = static_cast<double>(compute_load(inst.network.layers[j]));
    const int prev = j == 0 ? inst.source_uav : alloc[j - 1];
    const long long bytes = stage_bytes(inst.network, j);
    int pick = -1;
    double pick_cost = std::numeric_limits<double>::infinity();
    int memory_blocked = 0, compute_blocked = 0;
    for (int i = 0; i < n; ++i) {
      if (rem_mem[i] < need_mem) {
        ++memory_blocked;
        continue;
      }
      if (rem_cmp[i] < need_cmp) {
        ++compute_blocked;
        continue;
      }
      ++evaluated;
      double cost = need_cmp / inst.swarm[i].mult_rate;
      if (i != prev)
        cost += static_cast<double>(bytes) * 8.0 /
                data_rate(inst.grid, inst.radio, inst.initial_placement, prev, i);
      if (cost < pick_cost) {
        pick_cost = cost;
        pick = i;
      }
    }
    if (pick < 0) {
      const char* constraint = memory_blocked >= compute_blocked ? "memory" : "compute";
      throw InfeasibleError("layer " + std::to_string(j + 1) + " fits no UAV's remaining " +
                                constraint + " budget",
                            constraint);
    }
    rem_mem[pick] -= need_mem;
    rem_cmp[pick] -= need_cmp;
    alloc.push_back(pick);
  }
  return finish(inst, alloc, std::vector<Placement>(layers, inst.initial_placement), evaluated);
}

Placement random_placement(const GridConfig& grid, int uavs, Rng& rng) {
  const int cells = grid.cell_count();
  const int hot = static_cast<int>(grid.hot_cells.size());
  if (uavs > cells)
    throw InfeasibleError("more UAVs than cells", "placement");
  if (hot > uavs)
    throw InfeasibleError("fewer UAVs than hot cells", "placement");

  std::vector<int> uav_order(uavs);
  std::iota(uav_order.begin(), uav_order.end(), 0);
  for (int i = uavs - 1; i > 0; --i) std::swap(uav_order[i], uav_order[rng.below(i + 1)]);

  std::vector<bool> is_hot(cells, false);
  for (int c : grid.hot_cells) is_hot[c] = true;
  std::vector<int> cold;
  for (int c = 0; c < cells; ++c)
    if (!is_hot[c]) cold.push_back(c);
  for (int i = static_cast<int>(cold.size()) - 1; i > 0; --i)
    std::swap(cold[i], cold[rng.below(i + 1)]);

  Placement p(uavs, -1);
  int next = 0;
  for (int c : grid.hot_cells) p[uav_order[next++]] = c;
  std::size_t pool = 0;
  for (; next < uavs; ++next) p[uav_order[next]] = cold[pool++];
  return p;
}

RandomBaselineStats random_baseline(const InstanceSpec& inst, int trials, std::uint64_t seed) {
  check_instance(inst);
  if (trials < 1) throw ConfigError("random baseline needs at least one trial");
  const int n = static_cast<int>(inst.swarm.size());
  const int layers = static_cast<int>(inst.network.layers.size());
  Rng rng(Rng::derive(seed, 0xba5e));

  RandomBaselineStats stats;
  stats.trials = trials;
  stats.best_s = std::numeric_limits<double>::infinity();
  stats.worst_s = -std::numeric_limits<double>::infinity();
  double sum = 0.0, sum_sq = 0.0;
  int rejected = 0;
  for (int t = 0; t < trials;) {
    std::vector<double> rem_mem(n), rem_cmp(n);
    for (int i = 0; i < n; ++i) {
      rem_mem[i] = inst.swarm[i].memory_bytes;
      rem_cmp[i] = inst.swarm[i].compute_mults;
    }
    std::vector<int> alloc;
    for (int j = 0; j < layers; ++j) {
      const double need_mem = static_cast<double>(layer_memory_bytes(inst.network.layers[j]));
      const double need_cmp = static_cast<double>(compute_load(inst.network.layers[j]));
      std::vector<int> fits;
      for (int i = 0; i < n; ++i)
        if (rem_mem[i] >= need_mem && rem_cmp[i] >= need_cmp) fits.push_back(i);
      if (fits.empty()) break;
      const int pick = fits[rng.below(static_cast<std::uint64_t>(fits.size()))];
      rem_mem[pick] -= need_mem;
      rem_cmp[pick] -= need_cmp;
      alloc.push_back(pick);
    }
    if (static_cast<int>(alloc.size()) != layers) {
      // myopic dead end; resample, but refuse to spin forever
      if (++rejected > 100 * trials)
        throw InfeasibleError("random allocation keeps running out of budget", "memory");
      continue;
    }
    AllocationPlan plan;
    plan.source_uav = inst.source_uav;
    plan.layer_uav = alloc;
    for (int j = 0; j < layers; ++j)
      plan.placements.push_back(random_placement(inst.grid, n, rng));
    const double total =
        total_latency(inst.network, inst.swarm, inst.grid, inst.radio, plan).total_s;
    sum += total;
    sum_sq += total * total;
    stats.best_s = std::min(stats.best_s, total);
    stats.worst_s = std::max(stats.worst_s, total);
    ++t;
  }
  stats.mean_s = sum / trials;
  stats.stddev_s = std::sqrt(std::max(0.0, sum_sq / trials - stats.mean_s * stats.mean_s));
  return stats;
}

// formation start: the tightest cell set covering the hot cells, anchored at a
// random cell so different instances cluster in different corners
Placement formation_placement(const GridConfig& grid, int uavs, Rng& rng) {
  const int cells = grid.cell_count();
  if (uavs > cells) throw InfeasibleError("more UAVs than cells", "placement");
  const int anchor = grid.hot_cells.empty() ? static_cast<int>(rng.below(cells))
                                            : grid.hot_cells.front();

  std::vector<int> best;
  double best_width = std::numeric_limits<double>::infinity();
  double best_spread = std::numeric_limits<double>::infinity();
  std::vector<int> pick;
  std::function<void(int)> choose = [&](int from) {
    if (static_cast<int>(pick.size()) == uavs) {
      for (int hot : grid.hot_cells)
        if (std::find(pick.begin(), pick.end(), hot) == pick.end()) return;
      double width = 0.0, spread = 0.0;
      for (std::size_t a = 0; a < pick.size(); ++a) {
        spread += cell_distance(grid, anchor, pick[a]);
        for (std::size_t b = a + 1; b < pick.size(); ++b)
          width = std::max(width, cell_distance(grid, pick[a], pick[b]));
      }
      if (width < best_width - 1e-9 ||
          (width < best_width + 1e-9 && spread < best_spread - 1e-9)) {
        best_width = width;
        best_spread = spread;
        best = pick;
      }
      return;
    }
    for (int c = from; c < cells; ++c) {
      pick.push_back(c);
      choose(c + 1);
      pick.pop_back();
    }
  };
  choose(0);
  if (best.empty()) throw InfeasibleError("hot cells exceed the swarm", "placement");

  std::vector<int> uav_order(uavs);
  std::iota(uav_order.begin(), uav_order.end(), 0);
  for (int i = uavs - 1; i > 0; --i) std::swap(uav_order[i], uav_order[rng.below(i + 1)]);
  Placement p(uavs, -1);
  for (int i = 0; i < uavs; ++i) p[uav_order[i]] = best[i];
  return p;
}

InstanceSpec random_instance(Rng& rng) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    InstanceSpec inst;
    const int layers = 3 + static_cast<int>(rng.below(3));
    std::vector<int> units{20 + static_cast<int>(rng.below(60))};
    for (int j = 0; j < layers; ++j) units.push_back(8 + static_cast<int>(rng.below(40)));

    inst.network.name = "synthetic";
    inst.network.input_bytes = 400 + static_cast<long long>(rng.below(1600));
    inst.network.class_count = units.back();
    for (int j = 0; j < layers; ++j) {
      LayerSpec l;
      l.kind = LayerKind::fc;
      l.in_units = units[j];
      l.out_units = units[j + 1];
      inst.network.layers.push_back(l);
    }

    inst.grid.side_cells = 2 + static_cast<int>(rng.below(2));
    if (inst.grid.side_cells == 3 && rng.uniform() < 0.3)
      inst.grid.hot_cells = {static_cast<int>(rng.below(9))};

    // three UAVs need the 3x3 grid, or some pair is stuck a diagonal apart
    const int uavs = 2 + static_cast<int>(rng.below(inst.grid.side_cells - 1));
    const double total_mem = static_cast<double>(inst.network.total_memory_bytes());
    const double total_cmp = static_cast<double>(inst.network.total_compute_load());
    for (int i = 0; i < uavs; ++i) {
      UavSpec uav;
      uav.mult_rate = 500.0 * (4 + static_cast<double>(rng.below(3)));
      uav.memory_bytes = total_mem * (0.45 + 0.75 * rng.uniform());
      uav.compute_mults = total_cmp * (0.45 + 0.75 * rng.uniform());
      inst.swarm.push_back(uav);
    }
    inst.initial_placement = formation_placement(inst.grid, uavs, rng);
    inst.source_uav = static_cast<int>(rng.below(uavs));

    try {
      exhaustive_oracle(inst);
      greedy_solver(inst);  // myopia can dead-end where the oracle does not
      return inst;
    } catch (const InfeasibleError&) {
      continue;
    }
  }
  throw std::logic_error("could not draw a feasible instance");
}

}  // namespace swarminfer
