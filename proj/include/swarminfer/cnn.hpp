// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace swarminfer {

enum class LayerKind { conv, fc };

// one CNN layer; conv uses all four fields, fc only in/out
struct LayerSpec {
  LayerKind kind = LayerKind::fc;
  long long in_units = 0;     // conv: input channels; fc: input neurons
  long long out_units = 0;    // conv: filters; fc: neurons
  long long kernel = 0;       // conv filter side
  long long out_spatial = 0;  // conv output feature-map side
};

// multiplications needed to evaluate the layer on one input
long long conv_compute_load(long long in_channels, long long kernel, long long filters,
                            long long out_spatial);
long long fc_compute_load(long long in_units, long long out_units);
long long compute_load(const LayerSpec& layer);

long long weight_count(const LayerSpec& layer);

// bytes to hold the layer's weights (default 32-bit weights)
long long layer_memory_bytes(const LayerSpec& layer, int bits_per_weight = 32);

// bytes of the layer's output activations (one float each)
long long intermediate_bytes(const LayerSpec& layer, int bytes_per_activation = 4);

struct NetworkSpec {
  std::string name;
  std::vector<LayerSpec> layers;
  long long input_bytes = 0;  // raw image bytes shipped to the first executor
  int class_count = 0;

  long long total_memory_bytes() const;
  long long total_compute_load() const;
};

// catalog: LeNet, AlexNet, VGG16 (names matched case-insensitively)
NetworkSpec build_network(const std::string& name);

NetworkSpec network_from_json_text(const std::string& text);
NetworkSpec load_network_file(const std::string& path);

// throws ConfigError when dimensions are nonpositive, conv fields are missing,
// or the final layer does not emit exactly one unit per class
void validate_network(const NetworkSpec& net);

}  // namespace swarminfer
