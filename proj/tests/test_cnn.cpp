// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <fstream>
#include <vector>

#include "swarminfer/cnn.hpp"
#include "swarminfer/errors.hpp"

using namespace swarminfer;

namespace {

// independent geometry tables, written down from the published architectures,
// so the catalog is cross-checked against numbers it did not produce
struct ConvRow {
  long long in, out, kernel, spatial;
};
struct FcRow {
  long long in, out;
};

const std::vector<ConvRow> kLeNetConv = {{3, 6, 5, 28}, {6, 16, 5, 10}};
const std::vector<FcRow> kLeNetFc = {{400, 120}, {120, 84}, {84, 10}};

const std::vector<ConvRow> kAlexConv = {
    {3, 96, 11, 55}, {96, 256, 5, 27}, {256, 384, 3, 13}, {384, 384, 3, 13}, {384, 256, 3, 13}};
const std::vector<FcRow> kAlexFc = {{9216, 4096}, {4096, 4096}, {4096, 1000}};

const std::vector<ConvRow> kVggConv = {
    {3, 64, 3, 224},    {64, 64, 3, 224},   {64, 128, 3, 112},  {128, 128, 3, 112},
    {128, 256, 3, 56},  {256, 256, 3, 56},  {256, 256, 3, 56},  {256, 512, 3, 28},
    {512, 512, 3, 28},  {512, 512, 3, 28},  {512, 512, 3, 14},  {512, 512, 3, 14},
    {512, 512, 3, 14}};
const std::vector<FcRow> kVggFc = {{25088, 4096}, {4096, 4096}, {4096, 1000}};

// brute-force multiplication count: one multiply per (input unit, kernel cell,
// output position) accumulated additively instead of as a closed-form product
long long brute_conv_mults(const ConvRow& r) {
  long long total = 0;
  for (long long c = 0; c < r.in; ++c)
    for (long long k = 0; k < r.kernel * r.kernel; ++k)
      for (long long f = 0; f < r.out; ++f) total += r.spatial * r.spatial;
  return total;
}

long long brute_fc_mults(const FcRow& r) {
  long long total = 0;
  for (long long i = 0; i < r.in; ++i) total += r.out;
  return total;
}

}  // namespace

TEST_CASE("conv compute load matches frozen references") {
  CHECK(conv_compute_load(3, 11, 96, 55) == 105415200);  // AlexNet conv1
  CHECK(conv_compute_load(3, 5, 6, 28) == 352800);       // LeNet conv1
  CHECK(conv_compute_load(1, 1, 1, 1) == 1);
}

TEST_CASE("fc compute load matches frozen references") {
  CHECK(fc_compute_load(120, 84) == 10080);    // LeNet fc4
  CHECK(fc_compute_load(4096, 1000) == 4096000);  // AlexNet fc8
  CHECK(fc_compute_load(1, 1) == 1);
}

TEST_CASE("layer memory in bytes from weight counts") {
  LayerSpec fc{LayerKind::fc, 120, 84, 0, 0};
  CHECK(weight_count(fc) == 10080);
  CHECK(layer_memory_bytes(fc) == 40320);

  LayerSpec conv{LayerKind::conv, 3, 96, 11, 55};
  CHECK(weight_count(conv) == 34848);
  CHECK(layer_memory_bytes(conv) == 139392);

  LayerSpec empty{LayerKind::fc, 0, 0, 0, 0};  // hypothetical, bypasses validation
  CHECK(layer_memory_bytes(empty) == 0);
}

TEST_CASE("intermediate activation sizes") {
  LayerSpec conv1{LayerKind::conv, 3, 6, 5, 28};
  CHECK(intermediate_bytes(conv1) == 18816);  // 28*28*6 floats
  LayerSpec fc{LayerKind::fc, 84, 10, 0, 0};
  CHECK(intermediate_bytes(fc) == 40);
  LayerSpec unit{LayerKind::conv, 1, 1, 1, 1};
  CHECK(intermediate_bytes(unit) == 4);
}

TEST_CASE("catalog networks have the documented shapes") {
  const NetworkSpec lenet = build_network("LeNet");
  CHECK(lenet.layers.size() == 5);
  CHECK(lenet.input_bytes == 3072);
  CHECK(lenet.class_count == 10);

  const NetworkSpec alex = build_network("AlexNet");
  CHECK(alex.layers.size() == 8);
  CHECK(alex.input_bytes == 154587);
  CHECK(alex.class_count == 1000);

  const NetworkSpec vgg = build_network("VGG16");
  CHECK(vgg.layers.size() == 16);
  CHECK(vgg.input_bytes == 150528);
  CHECK(vgg.class_count == 1000);

  int conv_n = 0, fc_n = 0;
  for (const auto& l : vgg.layers) (l.kind == LayerKind::conv ? conv_n : fc_n)++;
  CHECK(conv_n == 13);
  CHECK(fc_n == 3);
}

TEST_CASE("every catalog layer agrees with the independent brute force") {
  struct Case {
    const char* name;
    const std::vector<ConvRow>* conv;
    const std::vector<FcRow>* fc;
  };
  const Case cases[] = {{"LeNet", &kLeNetConv, &kLeNetFc},
                        {"AlexNet", &kAlexConv, &kAlexFc},
                        {"VGG16", &kVggConv, &kVggFc}};
  for (const auto& c : cases) {
    CAPTURE(c.name);
    const NetworkSpec net = build_network(c.name);
    REQUIRE(net.layers.size() == c.conv->size() + c.fc->size());
    for (size_t j = 0; j < net.layers.size(); ++j) {
      const LayerSpec& l = net.layers[j];
      if (j < c.conv->size()) {
        const ConvRow& r = (*c.conv)[j];
        REQUIRE(l.kind == LayerKind::conv);
        CHECK(l.in_units == r.in);
        CHECK(l.out_units == r.out);
        CHECK(l.kernel == r.kernel);
        CHECK(l.out_spatial == r.spatial);
        CHECK(compute_load(l) == brute_conv_mults(r));
        CHECK(weight_count(l) == r.in * r.kernel * r.kernel * r.out);
      } else {
        const FcRow& r = (*c.fc)[j - c.conv->size()];
        REQUIRE(l.kind == LayerKind::fc);
        CHECK(compute_load(l) == brute_fc_mults(r));
        CHECK(weight_count(l) == r.in * r.out);
      }
    }
  }
}

TEST_CASE("structural invariants hold for the catalog") {
  for (const char* name : {"LeNet", "AlexNet", "VGG16"}) {
    const NetworkSpec net = build_network(name);
    for (const auto& l : net.layers) {
      CHECK(compute_load(l) > 0);
      CHECK(layer_memory_bytes(l) > 0);
      CHECK(intermediate_bytes(l) > 0);
      if (l.kind == LayerKind::conv) {
        CHECK(compute_load(l) % (l.out_spatial * l.out_spatial) == 0);
        CHECK(compute_load(l) % l.in_units == 0);
      }
    }
    // final activation carries one float per class
    CHECK(intermediate_bytes(net.layers.back()) == net.class_count * 4);
  }
  CHECK(build_network("LeNet").total_memory_bytes() <
        build_network("AlexNet").total_memory_bytes());
  CHECK(build_network("AlexNet").total_memory_bytes() <
        build_network("VGG16").total_memory_bytes());
}

TEST_CASE("builds are deterministic and case-insensitive on name") {
  const NetworkSpec a = build_network("LeNet");
  const NetworkSpec b = build_network("lenet");
  REQUIRE(a.layers.size() == b.layers.size());
  for (size_t j = 0; j < a.layers.size(); ++j) {
    CHECK(a.layers[j].in_units == b.layers[j].in_units);
    CHECK(compute_load(a.layers[j]) == compute_load(b.layers[j]));
  }
  CHECK_THROWS_AS(build_network("ResNet50"), ConfigError);
}

TEST_CASE("custom network round-trips through json") {
  const char* text = R"({
    "name": "tiny",
    "input": {"height": 8, "width": 8, "channels": 3},
    "class_count": 4,
    "layers": [
      {"kind": "conv", "in": 3, "out": 4, "kernel": 3, "out_spatial": 6},
      {"kind": "fc", "in": 144, "out": 4}
    ]
  })";
  const NetworkSpec net = network_from_json_text(text);
  CHECK(net.name == "tiny");
  CHECK(net.input_bytes == 192);
  CHECK(net.layers.size() == 2);
  CHECK(compute_load(net.layers[0]) == 3 * 9 * 4 * 36);
  CHECK(intermediate_bytes(net.layers[1]) == 16);

  const std::string path = "tiny_net_test.json";
  {
    std::ofstream out(path);
    out << text;
  }
  const NetworkSpec reread = load_network_file(path);
  CHECK(reread.layers.size() == net.layers.size());
  CHECK(reread.input_bytes == net.input_bytes);
}

TEST_CASE("malformed network json is rejected") {
  CHECK_THROWS_AS(network_from_json_text("{"), ConfigError);
  CHECK_THROWS_AS(network_from_json_text(R"({"name":"x"})"), ConfigError);
  // unknown key
  CHECK_THROWS_AS(network_from_json_text(R"({
    "name": "x", "input": {"height": 8, "width": 8, "channels": 3},
    "class_count": 2, "stride": 7,
    "layers": [{"kind": "fc", "in": 192, "out": 2}]
  })"),
                  ConfigError);
  // nonpositive dimension
  CHECK_THROWS_AS(network_from_json_text(R"({
    "name": "x", "input": {"height": 8, "width": 8, "channels": 3},
    "class_count": 2,
    "layers": [{"kind": "fc", "in": 0, "out": 2}]
  })"),
                  ConfigError);
  // final layer must emit one unit per class
  CHECK_THROWS_AS(network_from_json_text(R"({
    "name": "x", "input": {"height": 8, "width": 8, "channels": 3},
    "class_count": 2,
    "layers": [{"kind": "fc", "in": 192, "out": 5}]
  })"),
                  ConfigError);
}
