// SPDX-License-Identifier: Apache-2.0
#include "swarminfer/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "swarminfer/errors.hpp"
#include "swarminfer/latency.hpp"

namespace swarminfer {

using json = nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> known,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) ok = true;
    if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

const json& expect_object(const json& obj, const char* key, const std::string& where) {
  if (!obj[key].is_object()) throw ConfigError("'" + std::string(key) + "' in " + where + " must be an object");
  return obj[key];
}

double get_number(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw ConfigError("'" + std::string(key) + "' in " + where + " must be a number");
  return obj[key].get<double>();
}

long long get_integer(const json& obj, const char* key, long long fallback,
                      const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer())
    throw ConfigError("'" + std::string(key) + "' in " + where + " must be an integer");
  return obj[key].get<long long>();
}

bool get_boolean(const json& obj, const char* key, bool fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) throw ConfigError("'" + std::string(key) + "' in " + where + " must be a boolean");
  return obj[key].get<bool>();
}

std::string get_string(const json& obj, const char* key, const std::string& fallback,
                       const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) throw ConfigError("'" + std::string(key) + "' in " + where + " must be a string");
  return obj[key].get<std::string>();
}

double require_positive_number(const json& obj, const char* key, double fallback,
                               const std::string& where) {
  const double v = get_number(obj, key, fallback, where);
  if (!(v > 0.0)) throw ConfigError("'" + std::string(key) + "' in " + where + " must be positive");
  return v;
}

UavSpec parse_uav(const json& j, const std::string& where) {
  UavSpec uav;
  uav.mult_rate = require_positive_number(j, "mult_rate", uav.mult_rate, where);
  uav.memory_bytes = require_positive_number(j, "memory_bytes", uav.memory_bytes, where);
  uav.compute_mults = require_positive_number(j, "compute_mults", uav.compute_mults, where);
  return uav;
}

json uav_to_json(const UavSpec& uav) {
  return json{{"mult_rate", uav.mult_rate},
              {"memory_bytes", uav.memory_bytes},
              {"compute_mults", uav.compute_mults}};
}

// %.17g prints doubles so they parse back bit-exact; trailing newline per row
std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
}

std::string join_path(const std::string& dir, const char* name) {
  return (std::filesystem::path(dir) / name).string();
}

void prepare_out(const std::string& out_dir, const ExperimentConfig&) {
  if (out_dir.empty()) throw ConfigError("output directory must not be empty");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + out_dir + "': " + ec.message());
  write_text(join_path(out_dir, "schema.json"), config_schema_text());
}

void apply_event(SwarmEnv& env, const MembershipEvent& ev) {
  if (ev.action == "remove_uav")
    env.remove_uav(ev.uav);
  else
    env.add_uav(ev.spec);
}

json stats_to_json(const EvalStats& s) {
  return json{{"episodes", s.episodes},
              {"mean_reward", s.mean_reward},
              {"mean_accuracy", s.mean_accuracy},
              {"mean_coverage", s.mean_coverage},
              {"mean_penalty_s", s.mean_penalty_s},
              {"complete_plans", s.complete_plans},
              {"mean_latency_s", s.mean_latency_s}};
}

json plan_to_json(const AllocationPlan& plan, const LatencyBreakdown& br) {
  return json{{"source_uav", plan.source_uav},
              {"layer_uav", plan.layer_uav},
              {"placements", plan.placements},
              {"source_transfer_s", br.source_transfer_s},
              {"hop_s", br.hop_s},
              {"compute_s", br.compute_s},
              {"total_s", br.total_s},
              {"shared_bytes", br.shared_bytes}};
}

void write_report(const std::string& out_dir, const json& report) {
  write_text(join_path(out_dir, "report.json"), report.dump(2) + "\n");
}

SolveResult solve_by_name(const std::string& solver, const InstanceSpec& inst,
                          const ExperimentConfig& cfg) {
  if (solver == "greedy") return greedy_solver(inst);
  if (solver == "oracle") return exhaustive_oracle(inst);
  if (solver == "alternating")
    return alternating_solver(inst, cfg.baseline_restarts, cfg.baseline_max_rounds,
                              Rng::derive(cfg.seed, 0xa17e));
  throw ConfigError("unknown solver '" + solver + "' (known: greedy, alternating, oracle)");
}

}  // namespace

NetworkSpec ExperimentConfig::resolve_network() const {
  if (!network_file.empty()) return load_network_file(network_file);
  return build_network(network);
}

EpisodeConfig ExperimentConfig::episode_config() const {
  EpisodeConfig ec;
  ec.network = resolve_network();
  ec.swarm = swarm;
  ec.grid = grid;
  ec.radio = radio;
  ec.qos_factor = qos_factor;
  ec.hot_demand = hot_demand;
  ec.penalty_scale = penalty_scale;
  ec.adjacency_limited = adjacency_limited;
  return ec;
}

InstanceSpec ExperimentConfig::instance() const {
  InstanceSpec inst;
  inst.network = resolve_network();
  inst.swarm = swarm;
  inst.grid = grid;
  inst.radio = radio;
  Rng rng(Rng::derive(seed, 0xf0a));
  inst.initial_placement = formation_placement(grid, static_cast<int>(swarm.size()), rng);
  inst.source_uav = source_uav < 0 ? 0 : source_uav;
  return inst;
}

ExperimentConfig config_from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a json object");
  reject_unknown_keys(doc,
                      {"version", "seed", "network", "network_file", "source_uav", "grid", "radio",
                       "swarm", "episode", "train", "eval", "baseline", "sweep", "events"},
                      "config");
  if (!doc.contains("version")) throw ConfigError("config missing 'version'");
  if (!doc["version"].is_number_integer() || doc["version"].get<long long>() != 1)
    throw ConfigError("config version must be 1");

  ExperimentConfig cfg;
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer() && !doc["seed"].is_number_unsigned())
      throw ConfigError("'seed' must be an integer");
    if (doc["seed"].is_number_integer() && doc["seed"].get<long long>() < 0)
      throw ConfigError("'seed' must be non-negative");
    cfg.seed = doc["seed"].get<std::uint64_t>();
  }
  cfg.network = get_string(doc, "network", cfg.network, "config");
  cfg.network_file = get_string(doc, "network_file", cfg.network_file, "config");
  cfg.source_uav = static_cast<int>(get_integer(doc, "source_uav", cfg.source_uav, "config"));

  if (doc.contains("grid")) {
    const json& g = expect_object(doc, "grid", "config");
    reject_unknown_keys(g, {"side_cells", "cell_size_m", "hot_cells"}, "grid");
    cfg.grid.side_cells = static_cast<int>(get_integer(g, "side_cells", cfg.grid.side_cells, "grid"));
    if (cfg.grid.side_cells < 1) throw ConfigError("'side_cells' must be at least 1");
    cfg.grid.cell_size_m = require_positive_number(g, "cell_size_m", cfg.grid.cell_size_m, "grid");
    if (g.contains("hot_cells")) {
      if (!g["hot_cells"].is_array()) throw ConfigError("'hot_cells' must be an array");
      cfg.grid.hot_cells.clear();
      for (const json& c : g["hot_cells"]) {
        if (!c.is_number_integer()) throw ConfigError("'hot_cells' entries must be integers");
        const int cell = c.get<int>();
        if (cell < 0 || cell >= cfg.grid.cell_count())
          throw ConfigError("hot cell " + std::to_string(cell) + " is outside the grid");
        if (std::find(cfg.grid.hot_cells.begin(), cfg.grid.hot_cells.end(), cell) !=
            cfg.grid.hot_cells.end())
          throw ConfigError("hot cell " + std::to_string(cell) + " listed twice");
        cfg.grid.hot_cells.push_back(cell);
      }
    }
  }

  if (doc.contains("radio")) {
    const json& r = expect_object(doc, "radio", "config");
    reject_unknown_keys(r, {"h0", "tx_power_w", "noise_w", "bandwidth_hz"}, "radio");
    cfg.radio.h0 = require_positive_number(r, "h0", cfg.radio.h0, "radio");
    cfg.radio.tx_power_w = require_positive_number(r, "tx_power_w", cfg.radio.tx_power_w, "radio");
    cfg.radio.noise_w = require_positive_number(r, "noise_w", cfg.radio.noise_w, "radio");
    cfg.radio.bandwidth_hz =
        require_positive_number(r, "bandwidth_hz", cfg.radio.bandwidth_hz, "radio");
  }

  if (doc.contains("swarm")) {
    if (!doc["swarm"].is_array() || doc["swarm"].empty())
      throw ConfigError("'swarm' must be a non-empty array");
    cfg.swarm.clear();
    int group = 0;
    for (const json& j : doc["swarm"]) {
      const std::string where = "swarm group " + std::to_string(++group);
      if (!j.is_object()) throw ConfigError(where + " must be an object");
      reject_unknown_keys(j, {"mult_rate", "memory_bytes", "compute_mults", "count"}, where);
      const long long count = get_integer(j, "count", 1, where);
      if (count < 1) throw ConfigError("'count' in " + where + " must be at least 1");
      const UavSpec uav = parse_uav(j, where);
      for (long long i = 0; i < count; ++i) cfg.swarm.push_back(uav);
    }
  }

  if (doc.contains("episode")) {
    const json& e = expect_object(doc, "episode", "config");
    reject_unknown_keys(e, {"qos_factor", "hot_demand", "penalty_scale", "adjacency_limited"},
                        "episode");
    cfg.qos_factor = get_number(e, "qos_factor", cfg.qos_factor, "episode");
    if (cfg.qos_factor < 0.0) throw ConfigError("'qos_factor' must be non-negative");
    cfg.hot_demand = require_positive_number(e, "hot_demand", cfg.hot_demand, "episode");
    cfg.penalty_scale = get_number(e, "penalty_scale", cfg.penalty_scale, "episode");
    if (cfg.penalty_scale < 0.0) throw ConfigError("'penalty_scale' must be non-negative");
    cfg.adjacency_limited = get_boolean(e, "adjacency_limited", cfg.adjacency_limited, "episode");
  }

  if (doc.contains("train")) {
    const json& t = expect_object(doc, "train", "config");
    reject_unknown_keys(t,
                        {"gamma", "gae_lambda", "learning_rate", "batch_size", "minibatches",
                         "epochs", "clip", "value_coef", "entropy_coef", "max_grad_norm",
                         "normalize_advantages", "total_steps", "hidden"},
                        "train");
    TrainConfig& tc = cfg.train;
    tc.gamma = get_number(t, "gamma", tc.gamma, "train");
    if (tc.gamma <= 0.0 || tc.gamma > 1.0) throw ConfigError("'gamma' must be in (0, 1]");
    tc.gae_lambda = get_number(t, "gae_lambda", tc.gae_lambda, "train");
    if (tc.gae_lambda < 0.0 || tc.gae_lambda > 1.0) throw ConfigError("'gae_lambda' must be in [0, 1]");
    tc.learning_rate = require_positive_number(t, "learning_rate", tc.learning_rate, "train");
    tc.batch_size = static_cast<int>(get_integer(t, "batch_size", tc.batch_size, "train"));
    tc.minibatches = static_cast<int>(get_integer(t, "minibatches", tc.minibatches, "train"));
    tc.epochs = static_cast<int>(get_integer(t, "epochs", tc.epochs, "train"));
    if (tc.batch_size < 1 || tc.minibatches < 1 || tc.epochs < 1)
      throw ConfigError("'batch_size', 'minibatches', and 'epochs' must be at least 1");
    tc.clip = require_positive_number(t, "clip", tc.clip, "train");
    tc.value_coef = get_number(t, "value_coef", tc.value_coef, "train");
    tc.entropy_coef = get_number(t, "entropy_coef", tc.entropy_coef, "train");
    tc.max_grad_norm = get_number(t, "max_grad_norm", tc.max_grad_norm, "train");
    tc.normalize_advantages =
        get_boolean(t, "normalize_advantages", tc.normalize_advantages, "train");
    tc.total_steps = get_integer(t, "total_steps", tc.total_steps, "train");
    if (tc.total_steps < 1) throw ConfigError("'total_steps' must be at least 1");
    cfg.hidden = static_cast<int>(get_integer(t, "hidden", cfg.hidden, "train"));
    if (cfg.hidden < 1) throw ConfigError("'hidden' must be at least 1");
  }

  if (doc.contains("eval")) {
    const json& e = expect_object(doc, "eval", "config");
    reject_unknown_keys(e, {"episodes", "deterministic", "frames", "requests_per_frame"}, "eval");
    cfg.eval_episodes = static_cast<int>(get_integer(e, "episodes", cfg.eval_episodes, "eval"));
    if (cfg.eval_episodes < 1) throw ConfigError("'episodes' must be at least 1");
    cfg.eval_deterministic = get_boolean(e, "deterministic", cfg.eval_deterministic, "eval");
    cfg.frames = static_cast<int>(get_integer(e, "frames", cfg.frames, "eval"));
    if (cfg.frames < 1) throw ConfigError("'frames' must be at least 1");
    cfg.requests_per_frame = get_number(e, "requests_per_frame", cfg.requests_per_frame, "eval");
    if (cfg.requests_per_frame < 0.0) throw ConfigError("'requests_per_frame' must be non-negative");
  }

  if (doc.contains("baseline")) {
    const json& b = expect_object(doc, "baseline", "config");
    reject_unknown_keys(b, {"restarts", "max_rounds", "trials"}, "baseline");
    cfg.baseline_restarts =
        static_cast<int>(get_integer(b, "restarts", cfg.baseline_restarts, "baseline"));
    cfg.baseline_max_rounds =
        static_cast<int>(get_integer(b, "max_rounds", cfg.baseline_max_rounds, "baseline"));
    cfg.baseline_trials = static_cast<int>(get_integer(b, "trials", cfg.baseline_trials, "baseline"));
    if (cfg.baseline_restarts < 0 || cfg.baseline_max_rounds < 1 || cfg.baseline_trials < 1)
      throw ConfigError("baseline knobs out of range");
  }

  if (doc.contains("sweep")) {
    const json& s = expect_object(doc, "sweep", "config");
    reject_unknown_keys(s, {"parameter", "values", "solver"}, "sweep");
    cfg.sweep_parameter = get_string(s, "parameter", cfg.sweep_parameter, "sweep");
    cfg.sweep_solver = get_string(s, "solver", cfg.sweep_solver, "sweep");
    if (s.contains("values")) {
      if (!s["values"].is_array()) throw ConfigError("'values' in sweep must be an array");
      cfg.sweep_values.clear();
      for (const json& v : s["values"]) {
        if (!v.is_number()) throw ConfigError("'values' entries must be numbers");
        const double x = v.get<double>();
        if (!(x > 0.0)) throw ConfigError("'values' entries must be positive");
        cfg.sweep_values.push_back(x);
      }
    }
  }

  if (doc.contains("events")) {
    if (!doc["events"].is_array()) throw ConfigError("'events' must be an array");
    int n = 0;
    for (const json& j : doc["events"]) {
      const std::string where = "event " + std::to_string(++n);
      if (!j.is_object()) throw ConfigError(where + " must be an object");
      reject_unknown_keys(j, {"episode", "action", "uav", "uav_spec"}, where);
      MembershipEvent ev;
      ev.episode = static_cast<int>(get_integer(j, "episode", -1, where));
      if (ev.episode < 0) throw ConfigError("'episode' in " + where + " must be non-negative");
      ev.action = get_string(j, "action", "", where);
      if (ev.action == "remove_uav") {
        ev.uav = static_cast<int>(get_integer(j, "uav", -1, where));
        if (ev.uav < 0) throw ConfigError("'uav' in " + where + " must be non-negative");
      } else if (ev.action == "add_uav") {
        if (j.contains("uav_spec"))
          ev.spec = parse_uav(expect_object(j, "uav_spec", where), where + " uav_spec");
        else if (!cfg.swarm.empty())
          ev.spec = cfg.swarm.front();
      } else {
        throw ConfigError("'action' in " + where + " must be remove_uav or add_uav");
      }
      cfg.events.push_back(ev);
    }
  }

  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_json_text(buf.str());
}

std::string config_to_json_text(const ExperimentConfig& cfg) {
  json swarm = json::array();
  for (const UavSpec& uav : cfg.swarm) swarm.push_back(uav_to_json(uav));
  json events = json::array();
  for (const MembershipEvent& ev : cfg.events) {
    json j{{"episode", ev.episode}, {"action", ev.action}};
    if (ev.action == "remove_uav")
      j["uav"] = ev.uav;
    else
      j["uav_spec"] = uav_to_json(ev.spec);
    events.push_back(j);
  }
  json doc{
      {"version", 1},
      {"seed", cfg.seed},
      {"network", cfg.network},
      {"network_file", cfg.network_file},
      {"source_uav", cfg.source_uav},
      {"grid",
       {{"side_cells", cfg.grid.side_cells},
        {"cell_size_m", cfg.grid.cell_size_m},
        {"hot_cells", cfg.grid.hot_cells}}},
      {"radio",
       {{"h0", cfg.radio.h0},
        {"tx_power_w", cfg.radio.tx_power_w},
        {"noise_w", cfg.radio.noise_w},
        {"bandwidth_hz", cfg.radio.bandwidth_hz}}},
      {"swarm", swarm},
      {"episode",
       {{"qos_factor", cfg.qos_factor},
        {"hot_demand", cfg.hot_demand},
        {"penalty_scale", cfg.penalty_scale},
        {"adjacency_limited", cfg.adjacency_limited}}},
      {"train",
       {{"gamma", cfg.train.gamma},
        {"gae_lambda", cfg.train.gae_lambda},
        {"learning_rate", cfg.train.learning_rate},
        {"batch_size", cfg.train.batch_size},
        {"minibatches", cfg.train.minibatches},
        {"epochs", cfg.train.epochs},
        {"clip", cfg.train.clip},
        {"value_coef", cfg.train.value_coef},
        {"entropy_coef", cfg.train.entropy_coef},
        {"max_grad_norm", cfg.train.max_grad_norm},
        {"normalize_advantages", cfg.train.normalize_advantages},
        {"total_steps", cfg.train.total_steps},
        {"hidden", cfg.hidden}}},
      {"eval",
       {{"episodes", cfg.eval_episodes},
        {"deterministic", cfg.eval_deterministic},
        {"frames", cfg.frames},
        {"requests_per_frame", cfg.requests_per_frame}}},
      {"baseline",
       {{"restarts", cfg.baseline_restarts},
        {"max_rounds", cfg.baseline_max_rounds},
        {"trials", cfg.baseline_trials}}},
      {"sweep",
       {{"parameter", cfg.sweep_parameter},
        {"values", cfg.sweep_values},
        {"solver", cfg.sweep_solver}}},
      {"events", events},
  };
  return doc.dump(2) + "\n";
}

const std::string& config_schema_text() {
  static const std::string text = R"json({
  "format": "swarminfer-config",
  "version": 1,
  "fields": {
    "version": "int, required, must equal 1",
    "seed": "non-negative int, master seed for every derived stream (default 1)",
    "network": "lenet | alexnet | vgg16 (default lenet)",
    "network_file": "path to a network json; overrides 'network' when non-empty",
    "source_uav": "int; the request's origin UAV, or -1 to draw one per episode (default -1)",
    "grid": {
      "side_cells": "int >= 1 (default 5)",
      "cell_size_m": "positive number (default 20.0)",
      "hot_cells": "array of distinct cell ids demanding coverage (default [])"
    },
    "radio": {
      "h0": "channel gain at 1 m (default 0.001)",
      "tx_power_w": "transmit power in watts (default 0.1)",
      "noise_w": "noise power in watts (default 7.9e-9)",
      "bandwidth_hz": "link bandwidth (default 1000.0)"
    },
    "swarm": "array of groups {mult_rate, memory_bytes, compute_mults, count=1}; expands to one UAV per count",
    "episode": {
      "qos_factor": "service weight on hot-cell coverage (default 0.0)",
      "hot_demand": "per-hot-cell demand at episode start (default 1.0)",
      "penalty_scale": "latency penalty weight in the reward (default 0.01)",
      "adjacency_limited": "restrict moves to the 8-neighborhood (default false)"
    },
    "train": {
      "gamma": "discount in (0, 1] (default 0.99)",
      "gae_lambda": "advantage smoothing in [0, 1] (default 0.95)",
      "learning_rate": "Adam step size (default 2.5e-4)",
      "batch_size": "rollout steps per update (default 512)",
      "minibatches": "chunks per epoch (default 4)",
      "epochs": "passes over each rollout (default 4)",
      "clip": "ratio clip radius (default 0.2)",
      "value_coef": "value loss weight (default 0.5)",
      "entropy_coef": "entropy bonus weight (default 0.01)",
      "max_grad_norm": "gradient clip threshold, <= 0 disables (default 0.5)",
      "normalize_advantages": "standardize advantages per batch (default true)",
      "total_steps": "environment steps to train for (default 200000)",
      "hidden": "policy trunk width (default 64)"
    },
    "eval": {
      "episodes": "episodes for post-training evaluation (default 32)",
      "deterministic": "argmax actions instead of sampling (default true)",
      "frames": "frames of request traffic; budgets replenish per frame (default 1)",
      "requests_per_frame": "Poisson arrival rate (default 1.0)"
    },
    "baseline": {
      "restarts": "alternating solver restarts (default 3)",
      "max_rounds": "alternating solver sweep limit (default 10)",
      "trials": "random baseline sample count (default 64)"
    },
    "sweep": {
      "parameter": "mult_rate | memory_bytes",
      "values": "positive numbers applied to every UAV in turn",
      "solver": "greedy | alternating | oracle (default greedy)"
    },
    "events": "array of {episode, action: remove_uav|add_uav, uav, uav_spec} applied before that training episode"
  }
}
)json";
  return text;
}

void apply_overrides(ExperimentConfig* cfg, const CliOverrides& o) {
  if (o.seed) cfg->seed = *o.seed;
  if (o.network) {
    cfg->network = *o.network;
    cfg->network_file.clear();
  }
  if (o.uavs) {
    if (*o.uavs < 1) throw ConfigError("UAV count must be at least 1");
    if (cfg->swarm.empty()) throw ConfigError("cannot resize an empty swarm");
    cfg->swarm.assign(static_cast<std::size_t>(*o.uavs), cfg->swarm.front());
  }
  if (o.qos_factor) {
    if (*o.qos_factor < 0.0) throw ConfigError("service factor must be non-negative");
    cfg->qos_factor = *o.qos_factor;
  }
}

std::vector<int> generate_requests(int frames, double rate_per_frame, Rng& rng) {
  if (frames < 0) throw ConfigError("frame count must be non-negative");
  if (rate_per_frame < 0.0) throw ConfigError("request rate must be non-negative");
  std::vector<int> requests(static_cast<std::size_t>(frames));
  for (int f = 0; f < frames; ++f) requests[f] = rng.poisson(rate_per_frame);
  return requests;
}

TrainArtifacts run_train(const ExperimentConfig& cfg, const std::string& out_dir) {
  prepare_out(out_dir, cfg);
  const EpisodeConfig ec = cfg.episode_config();
  SwarmEnv env(ec, Rng::derive(cfg.seed, 0xe4f));
  PolicyNet net(env.state_dim(), env.cell_count(), cfg.hidden);
  net.init_weights(Rng::derive(cfg.seed, 0x9e7));

  std::ofstream rewards(join_path(out_dir, "rewards.csv"), std::ios::binary);
  if (!rewards) throw ConfigError("cannot write rewards.csv in '" + out_dir + "'");
  rewards << "episode,steps,uavs,reward,penalty_s,accuracy,coverage,shared_bytes,"
             "plan_complete,latency_s\n";

  TrainHooks hooks;
  hooks.before_episode = [&cfg](int episode, SwarmEnv& e) {
    for (const MembershipEvent& ev : cfg.events)
      if (ev.episode == episode) apply_event(e, ev);
  };
  hooks.after_episode = [&rewards](int, const SwarmEnv&, const EpisodeStat& st) {
    rewards << st.episode << ',' << st.steps << ',' << st.uavs << ',' << num(st.reward) << ','
            << num(st.penalty_s) << ',' << num(st.accuracy) << ',' << num(st.coverage) << ','
            << st.shared_bytes << ',' << (st.plan_complete ? 1 : 0) << ',' << num(st.latency_s)
            << '\n';
  };

  TrainArtifacts art;
  art.result = train(net, env, cfg.train, cfg.seed, hooks);
  rewards.close();

  art.checkpoint_path = join_path(out_dir, "checkpoint.json");
  net.save(art.checkpoint_path);

  SwarmEnv eval_env(ec, Rng::derive(cfg.seed, 0xeba));
  art.final_eval = evaluate_policy(net, eval_env, cfg.eval_episodes, cfg.eval_deterministic,
                                   Rng::derive(cfg.seed, 0xe7a1));

  const std::vector<EpisodeStat>& eps = art.result.episodes;
  const std::size_t tail = eps.empty() ? 0 : std::max<std::size_t>(1, eps.size() / 4);
  double acc = 0.0;
  for (std::size_t i = eps.size() - tail; i < eps.size(); ++i) acc += eps[i].accuracy;
  art.late_accuracy = tail ? acc / static_cast<double>(tail) : 0.0;

  json report{{"mode", "train"},
              {"config", json::parse(config_to_json_text(cfg))},
              {"episodes", static_cast<long long>(eps.size())},
              {"env_steps", art.result.env_steps},
              {"updates", art.result.updates},
              {"last_update",
               {{"policy_loss", art.result.last_update.policy_loss},
                {"value_loss", art.result.last_update.value_loss},
                {"entropy", art.result.last_update.entropy},
                {"approx_kl", art.result.last_update.approx_kl},
                {"clip_fraction", art.result.last_update.clip_fraction}}},
              {"late_accuracy", art.late_accuracy},
              {"final_eval", stats_to_json(art.final_eval)},
              {"checkpoint", "checkpoint.json"}};
  art.report_path = join_path(out_dir, "report.json");
  write_report(out_dir, report);
  return art;
}

EvalArtifacts run_eval(const ExperimentConfig& cfg, const std::string& checkpoint_path,
                       const std::string& out_dir) {
  prepare_out(out_dir, cfg);
  const EpisodeConfig ec = cfg.episode_config();
  SwarmEnv env(ec, Rng::derive(cfg.seed, 0xeba1));
  if (cfg.source_uav >= static_cast<int>(cfg.swarm.size()))
    throw ConfigError("source_uav is outside the swarm");

  PolicyNet net = [&] {
    if (checkpoint_path.empty()) {
      PolicyNet fresh(env.state_dim(), env.cell_count(), cfg.hidden);
      fresh.init_weights(Rng::derive(cfg.seed, 0x9e7));
      return fresh;
    }
    return PolicyNet::load(checkpoint_path);
  }();
  if (net.state_dim() != env.state_dim() || net.cells() != env.cell_count())
    throw ConfigError("checkpoint was trained for a different grid");

  Rng req_rng(Rng::derive(cfg.seed, 0x4e9));
  Rng act_rng(Rng::derive(cfg.seed, 0xac7e));
  EvalArtifacts art;
  art.requests = generate_requests(cfg.frames, cfg.requests_per_frame, req_rng);

  std::ofstream trace(join_path(out_dir, "trace.csv"), std::ios::binary);
  std::ofstream latency(join_path(out_dir, "latency.csv"), std::ios::binary);
  if (!trace || !latency) throw ConfigError("cannot write csv outputs in '" + out_dir + "'");
  trace << "frame,request,episode,step,layer,uav,allocate,move_cell,cons1,cons2,cons3,"
           "reward,penalty_s,qos_bonus\n";
  latency << "episode,frame,request,reward,accuracy,coverage,shared_bytes,plan_complete,latency_s\n";

  EvalStats agg;
  int episode = 0;
  for (int f = 0; f < cfg.frames; ++f) {
    for (int r = 0; r < art.requests[f]; ++r) {
      const bool keep_budgets = r > 0;  // budgets replenish at frame boundaries
      Eigen::VectorXd x;
      {
        const std::vector<double> sv = cfg.source_uav >= 0
                                           ? env.reset_with_source(cfg.source_uav, keep_budgets)
                                           : env.reset(keep_budgets);
        x = Eigen::Map<const Eigen::VectorXd>(sv.data(), static_cast<long>(sv.size()));
      }
      while (!env.done()) {
        const PolicyNet::Sample s =
            cfg.eval_deterministic ? net.act_greedy(x) : net.act(x, act_rng);
        const StepResult sr = env.step({s.allocate, s.move_cell});
        x = Eigen::Map<const Eigen::VectorXd>(sr.state.data(), static_cast<long>(sr.state.size()));
      }
      for (const StepRecord& rec : env.episode_steps())
        trace << f << ',' << r << ',' << episode << ',' << rec.step << ',' << rec.info.layer << ','
              << rec.info.uav << ',' << rec.a1 << ',' << rec.a2 << ',' << (rec.info.cons1 ? 1 : 0)
              << ',' << (rec.info.cons2 ? 1 : 0) << ',' << (rec.info.cons3 ? 1 : 0) << ','
              << num(rec.reward) << ',' << num(rec.info.penalty_s) << ','
              << num(rec.info.qos_bonus) << '\n';

      bool complete = false;
      double latency_s = 0.0;
      if (const std::optional<AllocationPlan> plan = env.reconstruct_plan()) {
        std::string why;
        if (validate_plan(ec.network, env.swarm(), ec.grid, ec.radio, *plan, {false}, &why)) {
          latency_s = total_latency(ec.network, env.swarm(), ec.grid, ec.radio, *plan, {false}).total_s;
          complete = true;
        }
      }
      latency << episode << ',' << f << ',' << r << ',' << num(env.episode_reward()) << ','
              << num(env.episode_accuracy()) << ',' << num(env.episode_coverage()) << ','
              << env.episode_shared_bytes() << ',' << (complete ? 1 : 0) << ',' << num(latency_s)
              << '\n';

      agg.episodes += 1;
      agg.mean_reward += env.episode_reward();
      agg.mean_accuracy += env.episode_accuracy();
      agg.mean_coverage += env.episode_coverage();
      agg.mean_penalty_s += env.episode_penalty_s();
      if (complete) {
        agg.complete_plans += 1;
        agg.mean_latency_s += latency_s;
      }
      ++episode;
    }
  }
  if (agg.episodes > 0) {
    agg.mean_reward /= agg.episodes;
    agg.mean_accuracy /= agg.episodes;
    agg.mean_coverage /= agg.episodes;
    agg.mean_penalty_s /= agg.episodes;
  }
  if (agg.complete_plans > 0) agg.mean_latency_s /= agg.complete_plans;
  art.stats = agg;

  json report{{"mode", "eval"},
              {"config", json::parse(config_to_json_text(cfg))},
              {"checkpoint", checkpoint_path.empty() ? "fresh" : checkpoint_path},
              {"requests", art.requests},
              {"stats", stats_to_json(agg)}};
  art.trace_path = join_path(out_dir, "trace.csv");
  art.report_path = join_path(out_dir, "report.json");
  write_report(out_dir, report);
  return art;
}

BaselineArtifacts run_baseline(const ExperimentConfig& cfg, const std::string& out_dir) {
  prepare_out(out_dir, cfg);
  const InstanceSpec inst = cfg.instance();

  BaselineArtifacts art;
  std::string first_blocker;
  const auto attempt = [&](const std::string& name, const std::function<SolveResult()>& solve) {
    SolverRow row;
    row.solver = name;
    try {
      const SolveResult res = solve();
      row.solved = true;
      row.total_s = res.breakdown.total_s;
      row.shared_bytes = res.breakdown.shared_bytes;
    } catch (const ConfigError& e) {
      row.note = e.what();
    } catch (const InfeasibleError& e) {
      row.note = e.what();
      if (first_blocker.empty()) first_blocker = e.binding_constraint;
    }
    art.rows.push_back(row);
  };
  attempt("oracle", [&] { return exhaustive_oracle(inst); });
  attempt("alternating", [&] {
    return alternating_solver(inst, cfg.baseline_restarts, cfg.baseline_max_rounds,
                              Rng::derive(cfg.seed, 0xa17e));
  });
  attempt("greedy", [&] { return greedy_solver(inst); });

  bool have_random = false;
  std::string random_note;
  try {
    art.random = random_baseline(inst, cfg.baseline_trials, Rng::derive(cfg.seed, 0xba5e));
    have_random = true;
  } catch (const InfeasibleError& e) {
    random_note = e.what();
    if (first_blocker.empty()) first_blocker = e.binding_constraint;
  }

  bool any = have_random;
  for (const SolverRow& row : art.rows) any = any || row.solved;
  if (!any)
    throw InfeasibleError("no solver could price the instance", first_blocker);

  std::ostringstream csv;
  csv << "solver,solved,total_s,shared_bytes\n";
  for (const SolverRow& row : art.rows) {
    csv << row.solver << ',' << (row.solved ? 1 : 0) << ','
        << (row.solved ? num(row.total_s) : std::string()) << ',';
    if (row.solved) csv << row.shared_bytes;
    csv << '\n';
  }
  if (have_random) {
    csv << "random_best,1," << num(art.random.best_s) << ",\n";
    csv << "random_mean,1," << num(art.random.mean_s) << ",\n";
    csv << "random_worst,1," << num(art.random.worst_s) << ",\n";
  }
  write_text(join_path(out_dir, "latency.csv"), csv.str());

  json rows = json::array();
  for (const SolverRow& row : art.rows) {
    json j{{"solver", row.solver}, {"solved", row.solved}};
    if (row.solved) {
      j["total_s"] = row.total_s;
      j["shared_bytes"] = row.shared_bytes;
    } else {
      j["note"] = row.note;
    }
    rows.push_back(j);
  }
  json report{{"mode", "baseline"},
              {"config", json::parse(config_to_json_text(cfg))},
              {"solvers", rows}};
  if (have_random)
    report["random"] = {{"trials", art.random.trials},
                        {"mean_s", art.random.mean_s},
                        {"stddev_s", art.random.stddev_s},
                        {"best_s", art.random.best_s},
                        {"worst_s", art.random.worst_s}};
  else
    report["random"] = {{"note", random_note}};
  art.report_path = join_path(out_dir, "report.json");
  write_report(out_dir, report);
  return art;
}

SweepArtifacts run_sweep(const ExperimentConfig& cfg, const std::string& out_dir) {
  prepare_out(out_dir, cfg);
  if (cfg.sweep_parameter != "mult_rate" && cfg.sweep_parameter != "memory_bytes")
    throw ConfigError("sweep parameter must be mult_rate or memory_bytes");
  if (cfg.sweep_values.empty()) throw ConfigError("sweep needs at least one value");

  SweepArtifacts art;
  art.parameter = cfg.sweep_parameter;
  for (const double value : cfg.sweep_values) {
    InstanceSpec inst = cfg.instance();
    for (UavSpec& uav : inst.swarm) {
      if (cfg.sweep_parameter == "mult_rate")
        uav.mult_rate = value;
      else
        uav.memory_bytes = value;
    }
    const SolveResult res = solve_by_name(cfg.sweep_solver, inst, cfg);
    art.points.push_back({value, res.breakdown.total_s, res.breakdown.shared_bytes});
  }

  std::ostringstream csv;
  csv << "value,total_s,shared_bytes\n";
  for (const SweepPoint& p : art.points)
    csv << num(p.value) << ',' << num(p.total_s) << ',' << p.shared_bytes << '\n';
  write_text(join_path(out_dir, "latency.csv"), csv.str());

  json points = json::array();
  for (const SweepPoint& p : art.points)
    points.push_back(
        {{"value", p.value}, {"total_s", p.total_s}, {"shared_bytes", p.shared_bytes}});
  json report{{"mode", "sweep"},
              {"config", json::parse(config_to_json_text(cfg))},
              {"parameter", art.parameter},
              {"solver", cfg.sweep_solver},
              {"points", points}};
  art.report_path = join_path(out_dir, "report.json");
  write_report(out_dir, report);
  return art;
}

OracleArtifacts run_oracle(const ExperimentConfig& cfg, const std::string& out_dir) {
  prepare_out(out_dir, cfg);
  OracleArtifacts art;
  art.result = exhaustive_oracle(cfg.instance());

  std::ostringstream csv;
  csv << "solver,solved,total_s,shared_bytes\n";
  csv << "oracle,1," << num(art.result.breakdown.total_s) << ','
      << art.result.breakdown.shared_bytes << '\n';
  write_text(join_path(out_dir, "latency.csv"), csv.str());

  json report{{"mode", "oracle"},
              {"config", json::parse(config_to_json_text(cfg))},
              {"plan", plan_to_json(art.result.plan, art.result.breakdown)},
              {"evaluated", art.result.evaluated}};
  art.report_path = join_path(out_dir, "report.json");
  write_report(out_dir, report);
  return art;
}

int min_uav_search(const ExperimentConfig& cfg, int max_uavs, const FeasibilityProbe& probe) {
  if (max_uavs < 1) throw ConfigError("max UAV count must be at least 1");
  if (cfg.swarm.empty()) throw ConfigError("min UAV search needs a reference UAV spec");
  const FeasibilityProbe feasible = probe ? probe : [](const ExperimentConfig& c, int) {
    try {
      greedy_solver(c.instance());
      return true;
    } catch (const InfeasibleError&) {
      return false;
    }
  };
  for (int n = 1; n <= max_uavs; ++n) {
    ExperimentConfig trial = cfg;
    trial.swarm.assign(static_cast<std::size_t>(n), cfg.swarm.front());
    if (trial.source_uav >= n) trial.source_uav = 0;
    if (feasible(trial, n)) return n;
  }
  throw InfeasibleError("even " + std::to_string(max_uavs) + " UAVs cannot hold the network",
                        "memory");
}

}  // namespace swarminfer
