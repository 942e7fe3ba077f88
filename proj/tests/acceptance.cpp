// SPDX-License-Identifier: Apache-2.0
// end-to-end acceptance gate: nine checks, one verdict line each, exit code
// equal to the number of failures; thresholds are pinned inline

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "swarminfer/errors.hpp"
#include "swarminfer/experiment.hpp"
#include "swarminfer/latency.hpp"

using namespace swarminfer;

namespace {

int g_failures = 0;

void verdict(const char* name, bool ok, const std::string& detail) {
  std::printf("%s  %-24s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string scratch(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() / ("swarminfer_accept_" + tag);
  std::filesystem::remove_all(dir);
  return dir.string();
}

// ---- 1: layer cost model against hand-computed values ----------------------

void check_layer_costs() {
  const NetworkSpec lenet = build_network("lenet");
  const NetworkSpec alexnet = build_network("alexnet");
  const NetworkSpec vgg = build_network("vgg16");
  bool ok = true;
  std::string detail;

  const long long alex1 = compute_load(alexnet.layers[0]);
  ok = ok && alex1 == 105415200;
  const long long len1 = compute_load(lenet.layers[0]);
  ok = ok && len1 == 352800;
  ok = ok && layer_memory_bytes(alexnet.layers[0]) == 139392;
  ok = ok && compute_load(lenet.layers[3]) == 10080;
  ok = ok && layer_memory_bytes(lenet.layers[3]) == 40320;
  const std::vector<long long> lenet_mem{1800, 9600, 192000, 40320, 3360};
  for (std::size_t j = 0; j < lenet_mem.size(); ++j)
    ok = ok && layer_memory_bytes(lenet.layers[j]) == lenet_mem[j];
  ok = ok && lenet.input_bytes == 3072;
  ok = ok && alexnet.input_bytes == 154587;
  ok = ok && vgg.input_bytes == 150528;

  std::ostringstream d;
  d << "alexnet conv1 " << alex1 << " mults, lenet conv1 " << len1
    << " mults, inputs 3072/154587/150528 bytes";
  verdict("layer-cost-model", ok, d.str());
}

// ---- 2: inverse-square channel and the resulting link rate -----------------

void check_radio_model() {
  GridConfig grid;
  grid.side_cells = 3;
  grid.cell_size_m = 20.0;
  RadioParams radio;  // defaults: h0 1e-3, P 0.1 W, noise 7.9e-9 W, B 1 kHz

  const Placement near{0, 1, 2};  // 20 m and 40 m separations on one row
  const double g20 = channel_gain(grid, radio, near, 0, 1);
  const double g40 = channel_gain(grid, radio, near, 0, 2);
  const double rate20 = data_rate(grid, radio, near, 0, 1);

  const bool gain_ok = std::abs(g20 - 2.5e-6) <= 1e-12;
  const bool square_ok = std::abs(g20 / g40 - 4.0) <= 1e-9;
  const bool rate_ok = std::abs(rate20 - 5028.83) <= 1.0;

  std::ostringstream d;
  d << "gain(20m)=" << g20 << ", gain ratio 2d:d=" << g20 / g40 << ", rate(20m)=" << rate20
    << " bit/s";
  verdict("radio-model", gain_ok && square_ok && rate_ok, d.str());
}

// ---- 3: solver ordering over random instances -------------------------------

void check_solver_ordering() {
  Rng rng(2024);
  const int n = 60;
  const double tol = 1e-9;
  int ordered = 0, alt_close = 0;
  for (int i = 0; i < n; ++i) {
    const InstanceSpec inst = random_instance(rng);
    const double oracle = exhaustive_oracle(inst).breakdown.total_s;
    const double alt = alternating_solver(inst, 3, 10, 7).breakdown.total_s;
    const double greedy = greedy_solver(inst).breakdown.total_s;
    const double rand_mean = random_baseline(inst, 48, 11).mean_s;
    if (oracle <= alt + tol && alt <= greedy + tol && greedy <= rand_mean + tol) ++ordered;
    if (alt <= 1.40 * oracle + tol) ++alt_close;
  }
  std::ostringstream d;
  d << ordered << "/" << n << " instances ordered oracle<=alternating<=greedy<=random-mean, "
    << alt_close << "/" << n << " alternating within 1.40x of optimum (need >=90%)";
  verdict("solver-ordering", ordered == n && alt_close * 10 >= n * 9, d.str());
}

// ---- 4: analytic policy gradient vs finite differences ---------------------

void check_gradient() {
  PolicyNet net(12, 4, 8);
  net.init_weights(5);
  PolicyNet behavior(12, 4, 8);
  behavior.init_weights(17);
  Rng rng(23);

  const int batch = 16;
  MiniBatch mb;
  mb.states.resize(12, batch);
  mb.logp_old.resize(batch);
  mb.advantages.resize(batch);
  mb.returns.resize(batch);
  for (int i = 0; i < batch; ++i) {
    for (int d = 0; d < 12; ++d) mb.states(d, i) = 2.0 * rng.uniform() - 1.0;
    mb.a1.push_back(static_cast<int>(rng.below(2)));
    mb.a2.push_back(static_cast<int>(rng.below(4)));
    const auto ev = behavior.evaluate(mb.states.col(i));
    mb.logp_old[i] = ev.alloc_logp[mb.a1[i]] + ev.move_logp[mb.a2[i]];
    mb.advantages[i] = 4.0 * rng.uniform() - 2.0;
    mb.returns[i] = 2.0 * rng.uniform() - 1.0;
  }

  Eigen::VectorXd grad;
  ppo_loss(net, mb, 0.2, 0.5, 0.01, true, &grad);
  const double h = 1e-5;
  double worst = 0.0;
  for (int i = 0; i < net.param_count(); ++i) {
    const double keep = net.params()[i];
    net.params()[i] = keep + h;
    const double up = ppo_loss(net, mb, 0.2, 0.5, 0.01, true, nullptr).total;
    net.params()[i] = keep - h;
    const double down = ppo_loss(net, mb, 0.2, 0.5, 0.01, true, nullptr).total;
    net.params()[i] = keep;
    const double numeric = (up - down) / (2.0 * h);
    worst = std::max(worst, std::abs(grad[i] - numeric) /
                                std::max({std::abs(grad[i]), std::abs(numeric), 1e-4}));
  }
  std::ostringstream d;
  d << "worst relative error " << worst << " over " << net.param_count()
    << " parameters (limit 1e-4)";
  verdict("policy-gradient", worst <= 1e-4, d.str());
}

// ---- 5: learning the full task within the step budget ----------------------

void check_convergence() {
  int passed = 0;
  std::ostringstream d;
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    EpisodeConfig ec;
    ec.network = build_network("lenet");
    ec.swarm.assign(5, UavSpec{});
    ec.grid.side_cells = 5;
    SwarmEnv env(ec, Rng::derive(seed, 0xe4f));
    PolicyNet net(env.state_dim(), env.cell_count(), 64);
    net.init_weights(Rng::derive(seed, 0x9e7));
    TrainConfig tc;
    tc.total_steps = 500000;
    TrainHooks hooks;
    hooks.should_stop = [](const std::vector<EpisodeStat>& eps) {
      if (eps.size() < 50) return false;
      double acc = 0.0;
      for (std::size_t i = eps.size() - 50; i < eps.size(); ++i) acc += eps[i].accuracy;
      return acc / 50.0 >= 0.93;
    };
    const TrainResult tr = train(net, env, tc, seed, hooks);
    SwarmEnv ev(ec, Rng::derive(seed, 0xeba));
    const EvalStats es = evaluate_policy(net, ev, 50, true, Rng::derive(seed, 0xe7a1));
    if (es.mean_accuracy >= 0.90 && tr.env_steps <= 500000) ++passed;
    d << "seed " << seed << ": " << es.mean_accuracy << " acc in " << tr.env_steps << " steps; ";
  }
  d << passed << "/3 seeds reached 0.90 (need >=2)";
  verdict("ppo-convergence", passed >= 2, d.str());
}

// ---- 6: the service factor buys hot-cell coverage ---------------------------

void check_qos_effect() {
  double mean_gap = 0.0;
  std::ostringstream d;
  for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
    double cov[2] = {0.0, 0.0};
    for (int k = 0; k < 2; ++k) {
      EpisodeConfig ec;
      ec.network = build_network("lenet");
      ec.swarm.assign(3, UavSpec{});
      ec.grid.side_cells = 3;
      ec.grid.hot_cells = {0, 8};
      ec.qos_factor = k == 0 ? 0.0 : 1.0;
      ec.hot_demand = 3.0;
      SwarmEnv env(ec, Rng::derive(seed, 0xe4f));
      PolicyNet net(env.state_dim(), env.cell_count(), 64);
      net.init_weights(Rng::derive(seed, 0x9e7));
      TrainConfig tc;
      tc.total_steps = 150000;
      train(net, env, tc, seed);
      SwarmEnv ev(ec, Rng::derive(seed, 0xeba));
      cov[k] = evaluate_policy(net, ev, 50, true, Rng::derive(seed, 0xe7a1)).mean_coverage;
    }
    mean_gap += (cov[1] - cov[0]) / 3.0;
    d << "seed " << seed << ": " << cov[0] << " -> " << cov[1] << "; ";
  }
  d << "mean coverage gap " << mean_gap << " (need >=0.2)";
  verdict("service-coverage", mean_gap >= 0.2, d.str());
}

// ---- 7: capability sweeps move the optimum the right way --------------------

void check_sweeps() {
  ExperimentConfig dev = config_from_json_text(R"({"version": 1, "seed": 9})");
  dev.sweep_parameter = "mult_rate";
  dev.sweep_values = {2.56e8, 5.12e8, 5.6e8};
  const SweepArtifacts dev_art = run_sweep(dev, scratch("sweep_dev"));
  bool dev_ok = true;
  for (std::size_t i = 1; i < dev_art.points.size(); ++i)
    dev_ok = dev_ok && dev_art.points[i].total_s < dev_art.points[i - 1].total_s;

  ExperimentConfig mem = config_from_json_text(R"({
    "version": 1, "seed": 9,
    "grid": {"side_cells": 2},
    "swarm": [{"mult_rate": 2.56e8, "memory_bytes": 1e9, "compute_mults": 1e9, "count": 2}]
  })");
  mem.sweep_parameter = "memory_bytes";
  mem.sweep_values = {2.0e5, 2.1e5, 2.5e5};
  const SweepArtifacts mem_art = run_sweep(mem, scratch("sweep_mem"));
  bool mem_ok = true;
  for (std::size_t i = 1; i < mem_art.points.size(); ++i)
    mem_ok = mem_ok && mem_art.points[i].shared_bytes < mem_art.points[i - 1].shared_bytes;
  mem_ok = mem_ok && mem_art.points[0].shared_bytes == 6880 &&
           mem_art.points[1].shared_bytes == 480 && mem_art.points[2].shared_bytes == 0;

  std::ostringstream d;
  d << "latency " << dev_art.points[0].total_s << " > " << dev_art.points[1].total_s << " > "
    << dev_art.points[2].total_s << " s; shared " << mem_art.points[0].shared_bytes << " > "
    << mem_art.points[1].shared_bytes << " > " << mem_art.points[2].shared_bytes << " bytes";
  verdict("capability-sweeps", dev_ok && mem_ok, d.str());
}

// ---- 8: losing a UAV mid-training dents and then restores performance -------

void check_dynamic_swarm() {
  EpisodeConfig ec;
  ec.network = build_network("lenet");
  ec.swarm.assign(3, UavSpec{});
  ec.grid.side_cells = 3;
  SwarmEnv env(ec, Rng::derive(21, 0xe4f));
  PolicyNet net(env.state_dim(), env.cell_count(), 64);
  net.init_weights(Rng::derive(21, 0x9e7));
  TrainConfig tc;
  tc.total_steps = 400000;
  tc.entropy_coef = 0.02;  // keeps enough exploration to re-learn the new roster
  const int event_ep = 6000;
  TrainHooks hooks;
  hooks.before_episode = [&](int ep, SwarmEnv& e) {
    if (ep == event_ep) e.remove_uav(2);
  };
  const TrainResult tr = train(net, env, tc, 21, hooks);

  const auto mean_acc = [&](int lo, int hi) {
    double a = 0.0;
    int n = 0;
    for (int i = lo; i < hi && i < static_cast<int>(tr.episodes.size()); ++i) {
      a += tr.episodes[i].accuracy;
      ++n;
    }
    return n ? a / n : 0.0;
  };
  const int last = static_cast<int>(tr.episodes.size());
  const double pre = mean_acc(event_ep - 300, event_ep);
  const double post = mean_acc(event_ep, event_ep + 300);
  const double late = mean_acc(last - 2000, last);

  const bool ok = pre >= 0.5 && post <= pre - 0.2 && late >= 0.9 && late >= pre;
  std::ostringstream d;
  d << "accuracy " << pre << " before removal, " << post << " just after, " << late
    << " at the end";
  verdict("dynamic-swarm", ok, d.str());
}

// ---- 9: one seed, one byte stream -------------------------------------------

void check_determinism() {
  const ExperimentConfig cfg = config_from_json_text(R"({
    "version": 1, "seed": 40,
    "grid": {"side_cells": 2},
    "swarm": [{"mult_rate": 2.56e8, "memory_bytes": 1e9, "compute_mults": 1e9, "count": 2}],
    "train": {"total_steps": 512, "batch_size": 128, "minibatches": 2, "epochs": 2, "hidden": 16},
    "eval": {"episodes": 4, "frames": 4, "requests_per_frame": 2.0}
  })");
  const std::string t1 = scratch("det_t1"), t2 = scratch("det_t2");
  const TrainArtifacts a1 = run_train(cfg, t1);
  const TrainArtifacts a2 = run_train(cfg, t2);
  const std::string e1 = scratch("det_e1"), e2 = scratch("det_e2");
  run_eval(cfg, a1.checkpoint_path, e1);
  run_eval(cfg, a2.checkpoint_path, e2);

  const std::string trace = slurp(e1 + "/trace.csv");
  const bool traces_match = !trace.empty() && trace == slurp(e2 + "/trace.csv");
  const bool rewards_match = slurp(t1 + "/rewards.csv") == slurp(t2 + "/rewards.csv");
  const bool ckpt_match = slurp(a1.checkpoint_path) == slurp(a2.checkpoint_path);

  std::ostringstream d;
  d << "trace.csv " << (traces_match ? "byte-identical" : "DIFFERS") << ", rewards.csv "
    << (rewards_match ? "byte-identical" : "DIFFERS") << ", checkpoint "
    << (ckpt_match ? "byte-identical" : "DIFFERS");
  verdict("determinism", traces_match && rewards_match && ckpt_match, d.str());
}

}  // namespace

int main() {
  check_layer_costs();
  check_radio_model();
  check_solver_ordering();
  check_gradient();
  check_convergence();
  check_qos_effect();
  check_sweeps();
  check_dynamic_swarm();
  check_determinism();
  if (g_failures == 0)
    std::printf("all 9 checks passed\n");
  else
    std::printf("%d of 9 checks failed\n", g_failures);
  return g_failures;
}
