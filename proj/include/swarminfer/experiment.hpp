// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "swarminfer/env.hpp"
#include "swarminfer/ppo.hpp"
#include "swarminfer/solvers.hpp"

namespace swarminfer {

// swarm membership change applied between training episodes
struct MembershipEvent {
  int episode = 0;
  std::string action;  // "remove_uav" | "add_uav"
  int uav = -1;        // remove_uav target
  UavSpec spec;        // add_uav payload
};

// one run, loaded from a versioned JSON file; unknown keys are rejected so a
// typo fails loudly instead of silently running defaults
struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::string network = "lenet";
  std::string network_file;  // explicit layer table, wins over the name

  GridConfig grid;
  RadioParams radio;
  std::vector<UavSpec> swarm = std::vector<UavSpec>(5);

  double qos_factor = 0.0;
  double hot_demand = 1.0;
  double penalty_scale = 0.01;
  bool adjacency_limited = false;
  int source_uav = -1;  // -1: drawn fresh each episode

  TrainConfig train;
  int hidden = 64;

  int eval_episodes = 32;
  bool eval_deterministic = true;
  int frames = 1;                  // budgets replenish at frame boundaries
  double requests_per_frame = 1.0;  // Poisson arrival rate

  int baseline_restarts = 3;
  int baseline_max_rounds = 10;
  int baseline_trials = 64;

  std::string sweep_parameter;  // "mult_rate" | "memory_bytes"
  std::vector<double> sweep_values;
  std::string sweep_solver = "greedy";  // or "alternating" | "oracle"

  std::vector<MembershipEvent> events;

  NetworkSpec resolve_network() const;
  EpisodeConfig episode_config() const;
  // planning instance with a deterministic formation start
  InstanceSpec instance() const;
};

ExperimentConfig config_from_json_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);
// emits every field; parses back to an identical config
std::string config_to_json_text(const ExperimentConfig& cfg);

// field-by-field description of the config format, itself JSON
const std::string& config_schema_text();

struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> network;
  std::optional<int> uavs;        // resize the swarm, cloning the first spec
  std::optional<double> qos_factor;
};
void apply_overrides(ExperimentConfig* cfg, const CliOverrides& o);

// Poisson(rate) request count per frame
std::vector<int> generate_requests(int frames, double rate_per_frame, Rng& rng);

struct TrainArtifacts {
  TrainResult result;
  EvalStats final_eval;
  double late_accuracy = 0.0;  // mean over the last quarter of episodes
  std::string checkpoint_path;
  std::string report_path;
};
// writes rewards.csv, checkpoint.json, report.json, schema.json
TrainArtifacts run_train(const ExperimentConfig& cfg, const std::string& out_dir);

struct EvalArtifacts {
  EvalStats stats;
  std::vector<int> requests;  // per frame
  std::string trace_path;
  std::string report_path;
};
// rolls the policy through Poisson request traffic, budgets persisting within
// each frame; empty checkpoint path evaluates a freshly initialized policy;
// writes trace.csv, latency.csv, report.json, schema.json
EvalArtifacts run_eval(const ExperimentConfig& cfg, const std::string& checkpoint_path,
                       const std::string& out_dir);

struct SolverRow {
  std::string solver;
  bool solved = false;
  double total_s = 0.0;
  long long shared_bytes = 0;
  std::string note;  // why an unsolved row was skipped
};
struct BaselineArtifacts {
  std::vector<SolverRow> rows;
  RandomBaselineStats random;
  std::string report_path;
};
// prices the planning instance with every solver; writes latency.csv,
// report.json, schema.json; throws InfeasibleError only when no solver at all
// can price the instance
BaselineArtifacts run_baseline(const ExperimentConfig& cfg, const std::string& out_dir);

struct SweepPoint {
  double value = 0.0;
  double total_s = 0.0;
  long long shared_bytes = 0;
};
struct SweepArtifacts {
  std::string parameter;
  std::vector<SweepPoint> points;
  std::string report_path;
};
// re-solves the instance with every UAV's swept field set to each value;
// writes latency.csv, report.json, schema.json
SweepArtifacts run_sweep(const ExperimentConfig& cfg, const std::string& out_dir);

struct OracleArtifacts {
  SolveResult result;
  std::string report_path;
};
// exhaustive optimum with the full plan in report.json
OracleArtifacts run_oracle(const ExperimentConfig& cfg, const std::string& out_dir);

// smallest swarm (cloning the first UAV spec) the probe accepts; the default
// probe asks whether the one-pass allocator can hold the network
using FeasibilityProbe = std::function<bool(const ExperimentConfig&, int uavs)>;
int min_uav_search(const ExperimentConfig& cfg, int max_uavs, const FeasibilityProbe& probe = {});

}  // namespace swarminfer
