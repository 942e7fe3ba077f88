// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>
#include <cstdio>
#include <optional>
#include <string>

#include "swarminfer/errors.hpp"
#include "swarminfer/experiment.hpp"

using namespace swarminfer;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> network;
  std::optional<int> uavs;
  std::optional<double> sf;
};

void add_common(CLI::App* cmd, CommonArgs* args) {
  cmd->add_option("--config", args->config_path, "experiment config json (defaults apply without it)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args->out_dir, "output directory")->capture_default_str();
  cmd->add_option("--seed", args->seed, "master seed override");
  cmd->add_option("--network", args->network, "network name override (lenet, alexnet, vgg16)");
  cmd->add_option("--uavs", args->uavs, "swarm size override, cloning the first UAV spec");
  cmd->add_option("--sf", args->sf, "service factor override (hot-cell coverage weight)");
}

ExperimentConfig resolve(const CommonArgs& args) {
  ExperimentConfig cfg =
      args.config_path.empty() ? ExperimentConfig{} : load_config(args.config_path);
  CliOverrides o;
  o.seed = args.seed;
  o.network = args.network;
  o.uavs = args.uavs;
  o.qos_factor = args.sf;
  apply_overrides(&cfg, o);
  return cfg;
}

void print_eval(const char* label, const EvalStats& s) {
  std::printf("%s: episodes=%d reward=%.4f accuracy=%.4f coverage=%.4f", label, s.episodes,
              s.mean_reward, s.mean_accuracy, s.mean_coverage);
  if (s.complete_plans > 0)
    std::printf(" complete=%d latency=%.6fs", s.complete_plans, s.mean_latency_s);
  std::printf("\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributed CNN inference over a UAV swarm: PPO trainer and placement planners"};
  app.require_subcommand(1);

  CommonArgs train_args, eval_args, baseline_args, sweep_args, oracle_args;
  std::string eval_checkpoint;
  int min_uavs = 0;

  CLI::App* cmd_train = app.add_subcommand("train", "learn an allocation and flight policy");
  add_common(cmd_train, &train_args);
  CLI::App* cmd_eval = app.add_subcommand("eval", "roll a policy through request traffic");
  add_common(cmd_eval, &eval_args);
  cmd_eval->add_option("--checkpoint", eval_checkpoint, "policy checkpoint (omit for a fresh one)")
      ->check(CLI::ExistingFile);
  CLI::App* cmd_baseline = app.add_subcommand("baseline", "price one instance with every solver");
  add_common(cmd_baseline, &baseline_args);
  cmd_baseline->add_option("--min-uavs", min_uavs,
                           "also search the smallest swarm that fits, up to this size");
  CLI::App* cmd_sweep = app.add_subcommand("sweep", "re-solve while varying one UAV parameter");
  add_common(cmd_sweep, &sweep_args);
  CLI::App* cmd_oracle = app.add_subcommand("oracle", "exhaustive optimum for one instance");
  add_common(cmd_oracle, &oracle_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (cmd_train->parsed()) {
      const ExperimentConfig cfg = resolve(train_args);
      const TrainArtifacts art = run_train(cfg, train_args.out_dir);
      std::printf("trained %zu episodes (%lld steps, %d updates), late accuracy %.4f\n",
                  art.result.episodes.size(), art.result.env_steps, art.result.updates,
                  art.late_accuracy);
      print_eval("final eval", art.final_eval);
      std::printf("checkpoint: %s\n", art.checkpoint_path.c_str());
    } else if (cmd_eval->parsed()) {
      const ExperimentConfig cfg = resolve(eval_args);
      const EvalArtifacts art = run_eval(cfg, eval_checkpoint, eval_args.out_dir);
      int total = 0;
      for (int r : art.requests) total += r;
      std::printf("served %d requests over %zu frames\n", total, art.requests.size());
      print_eval("eval", art.stats);
      std::printf("trace: %s\n", art.trace_path.c_str());
    } else if (cmd_baseline->parsed()) {
      const ExperimentConfig cfg = resolve(baseline_args);
      const BaselineArtifacts art = run_baseline(cfg, baseline_args.out_dir);
      for (const SolverRow& row : art.rows) {
        if (row.solved)
          std::printf("%-12s %.6fs (%lld shared bytes)\n", row.solver.c_str(), row.total_s,
                      row.shared_bytes);
        else
          std::printf("%-12s skipped: %s\n", row.solver.c_str(), row.note.c_str());
      }
      if (art.random.trials > 0)
        std::printf("%-12s mean %.6fs (best %.6f, worst %.6f over %d trials)\n", "random",
                    art.random.mean_s, art.random.best_s, art.random.worst_s, art.random.trials);
      if (min_uavs > 0) {
        const int n = min_uav_search(cfg, min_uavs);
        std::printf("smallest feasible swarm: %d UAV%s\n", n, n == 1 ? "" : "s");
      }
    } else if (cmd_sweep->parsed()) {
      const ExperimentConfig cfg = resolve(sweep_args);
      const SweepArtifacts art = run_sweep(cfg, sweep_args.out_dir);
      for (const SweepPoint& p : art.points)
        std::printf("%s=%.6g  latency %.6fs  shared %lld bytes\n", art.parameter.c_str(), p.value,
                    p.total_s, p.shared_bytes);
    } else if (cmd_oracle->parsed()) {
      const ExperimentConfig cfg = resolve(oracle_args);
      const OracleArtifacts art = run_oracle(cfg, oracle_args.out_dir);
      std::printf("optimum %.6fs over %lld priced allocations\n", art.result.breakdown.total_s,
                  art.result.evaluated);
      std::printf("layer executors:");
      for (int uav : art.result.plan.layer_uav) std::printf(" %d", uav);
      std::printf("\n");
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const InfeasibleError& e) {
    if (e.binding_constraint.empty())
      std::fprintf(stderr, "infeasible: %s\n", e.what());
    else
      std::fprintf(stderr, "infeasible (%s): %s\n", e.binding_constraint.c_str(), e.what());
    return 3;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
