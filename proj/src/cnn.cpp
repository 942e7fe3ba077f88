// SPDX-License-Identifier: Apache-2.0
#include "swarminfer/cnn.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "swarminfer/errors.hpp"

namespace swarminfer {

using nlohmann::json;

long long conv_compute_load(long long in_channels, long long kernel, long long filters,
                            long long out_spatial) {
  if (in_channels <= 0 || kernel <= 0 || filters <= 0 || out_spatial <= 0)
    throw std::invalid_argument("conv_compute_load: dimensions must be positive");
  return in_channels * kernel * kernel * filters * out_spatial * out_spatial;
}

long long fc_compute_load(long long in_units, long long out_units) {
  if (in_units <= 0 || out_units <= 0)
    throw std::invalid_argument("fc_compute_load: dimensions must be positive");
  return in_units * out_units;
}

long long compute_load(const LayerSpec& layer) {
  return layer.kind == LayerKind::conv
             ? conv_compute_load(layer.in_units, layer.kernel, layer.out_units,
                                 layer.out_spatial)
             : fc_compute_load(layer.in_units, layer.out_units);
}

long long weight_count(const LayerSpec& layer) {
  if (layer.kind == LayerKind::conv)
    return layer.in_units * layer.kernel * layer.kernel * layer.out_units;
  return layer.in_units * layer.out_units;
}

long long layer_memory_bytes(const LayerSpec& layer, int bits_per_weight) {
  if (bits_per_weight <= 0 || bits_per_weight % 8 != 0)
    throw std::invalid_argument("layer_memory_bytes: bits_per_weight must be a positive multiple of 8");
  return weight_count(layer) * (bits_per_weight / 8);
}

long long intermediate_bytes(const LayerSpec& layer, int bytes_per_activation) {
  if (bytes_per_activation <= 0)
    throw std::invalid_argument("intermediate_bytes: bytes_per_activation must be positive");
  const long long units = layer.kind == LayerKind::conv
                              ? layer.out_spatial * layer.out_spatial * layer.out_units
                              : layer.out_units;
  return units * bytes_per_activation;
}

long long NetworkSpec::total_memory_bytes() const {
  long long total = 0;
  for (const auto& l : layers) total += layer_memory_bytes(l);
  return total;
}

long long NetworkSpec::total_compute_load() const {
  long long total = 0;
  for (const auto& l : layers) total += compute_load(l);
  return total;
}

namespace {

LayerSpec conv(long long in, long long out, long long k, long long z) {
  return {LayerKind::conv, in, out, k, z};
}
LayerSpec fc(long long in, long long out) { return {LayerKind::fc, in, out, 0, 0}; }

NetworkSpec lenet() {
  NetworkSpec n;
  n.name = "LeNet";
  n.layers = {conv(3, 6, 5, 28), conv(6, 16, 5, 10), fc(400, 120), fc(120, 84), fc(84, 10)};
  n.input_bytes = 32 * 32 * 3;
  n.class_count = 10;
  return n;
}

NetworkSpec alexnet() {
  NetworkSpec n;
  n.name = "AlexNet";
  n.layers = {conv(3, 96, 11, 55),   conv(96, 256, 5, 27), conv(256, 384, 3, 13),
              conv(384, 384, 3, 13), conv(384, 256, 3, 13), fc(9216, 4096),
              fc(4096, 4096),        fc(4096, 1000)};
  n.input_bytes = 227 * 227 * 3;
  n.class_count = 1000;
  return n;
}

NetworkSpec vgg16() {
  NetworkSpec n;
  n.name = "VGG16";
  n.layers = {conv(3, 64, 3, 224),   conv(64, 64, 3, 224),  conv(64, 128, 3, 112),
              conv(128, 128, 3, 112), conv(128, 256, 3, 56), conv(256, 256, 3, 56),
              conv(256, 256, 3, 56),  conv(256, 512, 3, 28), conv(512, 512, 3, 28),
              conv(512, 512, 3, 28),  conv(512, 512, 3, 14), conv(512, 512, 3, 14),
              conv(512, 512, 3, 14),  fc(25088, 4096),       fc(4096, 4096),
              fc(4096, 1000)};
  n.input_bytes = 224 * 224 * 3;
  n.class_count = 1000;
  return n;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> known,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) ok = true;
    if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

long long require_positive(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError("missing key '" + std::string(key) + "' in " + where);
  if (!obj[key].is_number_integer())
    throw ConfigError("key '" + std::string(key) + "' in " + where + " must be an integer");
  const long long v = obj[key].get<long long>();
  if (v <= 0) throw ConfigError("key '" + std::string(key) + "' in " + where + " must be positive");
  return v;
}

}  // namespace

void validate_network(const NetworkSpec& net) {
  if (net.layers.empty()) throw ConfigError("network '" + net.name + "' has no layers");
  if (net.input_bytes <= 0) throw ConfigError("network input size must be positive");
  if (net.class_count <= 0) throw ConfigError("class count must be positive");
  for (size_t j = 0; j < net.layers.size(); ++j) {
    const LayerSpec& l = net.layers[j];
    const std::string where = "layer " + std::to_string(j + 1) + " of '" + net.name + "'";
    if (l.in_units <= 0 || l.out_units <= 0) throw ConfigError(where + ": units must be positive");
    if (l.kind == LayerKind::conv && (l.kernel <= 0 || l.out_spatial <= 0))
      throw ConfigError(where + ": conv layers need positive kernel and output size");
  }
  const LayerSpec& last = net.layers.back();
  const long long final_units = last.kind == LayerKind::conv
                                    ? last.out_spatial * last.out_spatial * last.out_units
                                    : last.out_units;
  if (final_units != net.class_count)
    throw ConfigError("network '" + net.name + "' must end with one output unit per class");
}

NetworkSpec build_network(const std::string& name) {
  const std::string key = lower(name);
  NetworkSpec net;
  if (key == "lenet")
    net = lenet();
  else if (key == "alexnet")
    net = alexnet();
  else if (key == "vgg16")
    net = vgg16();
  else
    throw ConfigError("unknown network '" + name + "' (known: LeNet, AlexNet, VGG16)");
  validate_network(net);
  return net;
}

NetworkSpec network_from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("network json parse error: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("network json must be an object");
  reject_unknown_keys(doc, {"name", "input", "class_count", "layers"}, "network");
  for (const char* key : {"name", "input", "class_count", "layers"})
    if (!doc.contains(key)) throw ConfigError("network json missing key '" + std::string(key) + "'");

  NetworkSpec net;
  net.name = doc["name"].get<std::string>();

  const json& input = doc["input"];
  reject_unknown_keys(input, {"height", "width", "channels"}, "network input");
  const long long h = require_positive(input, "height", "network input");
  const long long w = require_positive(input, "width", "network input");
  const long long c = require_positive(input, "channels", "network input");
  net.input_bytes = h * w * c;

  net.class_count = static_cast<int>(require_positive(doc, "class_count", "network"));

  if (!doc["layers"].is_array() || doc["layers"].empty())
    throw ConfigError("network json needs a non-empty layers array");
  for (const json& jl : doc["layers"]) {
    const std::string where = "network layer " + std::to_string(net.layers.size() + 1);
    if (!jl.is_object()) throw ConfigError(where + " must be an object");
    if (!jl.contains("kind")) throw ConfigError(where + " missing 'kind'");
    const std::string kind = jl["kind"].get<std::string>();
    LayerSpec l;
    if (kind == "conv") {
      reject_unknown_keys(jl, {"kind", "in", "out", "kernel", "out_spatial"}, where);
      l = conv(require_positive(jl, "in", where), require_positive(jl, "out", where),
               require_positive(jl, "kernel", where), require_positive(jl, "out_spatial", where));
    } else if (kind == "fc") {
      reject_unknown_keys(jl, {"kind", "in", "out"}, where);
      l = fc(require_positive(jl, "in", where), require_positive(jl, "out", where));
    } else {
      throw ConfigError(where + ": kind must be 'conv' or 'fc'");
    }
    net.layers.push_back(l);
  }
  validate_network(net);
  return net;
}

NetworkSpec load_network_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open network file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return network_from_json_text(buf.str());
}

}  // namespace swarminfer
