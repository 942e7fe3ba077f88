// SPDX-License-Identifier: Apache-2.0
// python surface: a thin json-text bridge over the experiment harness, so the
// bindings stay stable while the C++ structs evolve

#include <pybind11/pybind11.h>

#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "swarminfer/errors.hpp"
#include "swarminfer/experiment.hpp"
#include "swarminfer/latency.hpp"

namespace py = pybind11;
using namespace swarminfer;
using json = nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string network_summary(const std::string& name) {
  const NetworkSpec net = build_network(name);
  json layers = json::array();
  for (const LayerSpec& l : net.layers)
    layers.push_back({{"kind", l.kind == LayerKind::conv ? "conv" : "fc"},
                      {"in", l.in_units},
                      {"out", l.out_units},
                      {"kernel", l.kernel},
                      {"out_spatial", l.out_spatial},
                      {"compute_mults", compute_load(l)},
                      {"memory_bytes", layer_memory_bytes(l)},
                      {"output_bytes", intermediate_bytes(l)}});
  const json doc{{"name", net.name},
                 {"input_bytes", net.input_bytes},
                 {"class_count", net.class_count},
                 {"total_memory_bytes", net.total_memory_bytes()},
                 {"total_compute_mults", net.total_compute_load()},
                 {"layers", layers}};
  return doc.dump();
}

std::string run_mode(const std::string& mode, const std::string& config_json,
                     const std::string& out_dir, const std::string& checkpoint) {
  const ExperimentConfig cfg = config_from_json_text(config_json);
  std::string report_path;
  if (mode == "train")
    report_path = run_train(cfg, out_dir).report_path;
  else if (mode == "eval")
    report_path = run_eval(cfg, checkpoint, out_dir).report_path;
  else if (mode == "baseline")
    report_path = run_baseline(cfg, out_dir).report_path;
  else if (mode == "sweep")
    report_path = run_sweep(cfg, out_dir).report_path;
  else if (mode == "oracle")
    report_path = run_oracle(cfg, out_dir).report_path;
  else
    throw ConfigError("unknown mode '" + mode +
                      "' (known: train, eval, baseline, sweep, oracle)");
  return slurp(report_path);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "distributed CNN inference over a UAV swarm: PPO trainer and placement planners";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<InfeasibleError>(m, "InfeasibleError");
  py::register_exception<NumericError>(m, "NumericError");

  m.def("config_schema", [] { return config_schema_text(); },
        "json description of every config field");
  m.def("default_config", [] { return config_to_json_text(ExperimentConfig{}); },
        "json text of a config with every default filled in");
  m.def("network_summary", &network_summary, py::arg("name"),
        "per-layer compute and memory costs of a catalog network, as json text");
  m.def("run", &run_mode, py::arg("mode"), py::arg("config_json"), py::arg("out_dir"),
        py::arg("checkpoint") = std::string(),
        "execute one mode (train, eval, baseline, sweep, oracle) and return report.json text");
  m.def(
      "min_uavs",
      [](const std::string& config_json, int max_uavs) {
        return min_uav_search(config_from_json_text(config_json), max_uavs);
      },
      py::arg("config_json"), py::arg("max_uavs"),
      "smallest swarm, cloning the first UAV spec, that can hold the network");

  m.attr("__version__") = "0.1.0";
}
