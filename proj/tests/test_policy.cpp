// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

#include "swarminfer/errors.hpp"
#include "swarminfer/policy.hpp"
#include "swarminfer/rng.hpp"

using namespace swarminfer;

namespace {

Eigen::VectorXd random_state(int dim, Rng& rng) {
  Eigen::VectorXd s(dim);
  for (int i = 0; i < dim; ++i) s[i] = 2.0 * rng.uniform() - 1.0;
  return s;
}

}  // namespace

TEST_CASE("zero parameters give uniform heads and zero value") {
  PolicyNet net(12, 9, 16);
  net.params().setZero();
  Rng rng(3);
  auto s = random_state(12, rng);
  auto ev = net.evaluate(s);
  CHECK(ev.alloc_probs[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(ev.alloc_probs[1] == doctest::Approx(0.5).epsilon(1e-12));
  for (int c = 0; c < 9; ++c) CHECK(ev.move_probs[c] == doctest::Approx(1.0 / 9).epsilon(1e-12));
  CHECK(ev.alloc_logp[0] == doctest::Approx(std::log(0.5)).epsilon(1e-12));
  CHECK(ev.move_logp[4] == doctest::Approx(std::log(1.0 / 9)).epsilon(1e-12));
  CHECK(ev.value == 0.0);
}

TEST_CASE("head probabilities sum to one for random weights and inputs") {
  PolicyNet net(30, 25);
  net.init_weights(11);
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto ev = net.evaluate(random_state(30, rng));
    CHECK(ev.alloc_probs.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ev.move_probs.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::isfinite(ev.value));
    for (int c = 0; c < 25; ++c)
      CHECK(ev.move_logp[c] == doctest::Approx(std::log(ev.move_probs[c])).epsilon(1e-9));
  }
}

TEST_CASE("evaluate is pure") {
  PolicyNet net(10, 4, 8);
  net.init_weights(2);
  Rng rng(8);
  auto s = random_state(10, rng);
  auto a = net.evaluate(s);
  auto b = net.evaluate(s);
  CHECK(a.value == b.value);
  CHECK((a.move_probs - b.move_probs).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.alloc_probs - b.alloc_probs).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("evaluate rejects a state of the wrong dimension") {
  PolicyNet net(10, 4, 8);
  net.init_weights(1);
  Eigen::VectorXd bad = Eigen::VectorXd::Zero(9);
  CHECK_THROWS_AS(net.evaluate(bad), std::invalid_argument);
}

TEST_CASE("weight init is seed-deterministic") {
  PolicyNet a(20, 9, 32), b(20, 9, 32), c(20, 9, 32);
  a.init_weights(7);
  b.init_weights(7);
  c.init_weights(8);
  CHECK((a.params() - b.params()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.params() - c.params()).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("init makes trunk rows orthonormal and biases zero") {
  PolicyNet net(12, 5, 8);
  net.init_weights(13);
  // 8x12 trunk with gain sqrt(2): W W^T = 2 I
  Eigen::MatrixXd w1 = net.w1();
  Eigen::MatrixXd gram = w1 * w1.transpose();
  Eigen::MatrixXd target = 2.0 * Eigen::MatrixXd::Identity(8, 8);
  CHECK((gram - target).cwiseAbs().maxCoeff() < 1e-9);
  // policy heads are near-zero scale, value head has unit norm
  Eigen::MatrixXd wa = net.wa();
  Eigen::MatrixXd gram_a = wa * wa.transpose();
  CHECK((gram_a - 1e-4 * Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::MatrixXd wv = net.wv();
  CHECK((wv * wv.transpose())(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(net.b1().cwiseAbs().maxCoeff() == 0.0);
  CHECK(net.bb().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("checkpoint round trip preserves every parameter") {
  PolicyNet net(14, 6, 12);
  net.init_weights(21);
  net.params()[3] = 0.1 + 1.0 / 3.0;
  const std::string path = "policy_roundtrip.json";
  net.save(path);
  PolicyNet back = PolicyNet::load(path);
  REQUIRE(back.state_dim() == 14);
  REQUIRE(back.cells() == 6);
  REQUIRE(back.hidden() == 12);
  CHECK((back.params() - net.params()).cwiseAbs().maxCoeff() == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("checkpoint loader rejects malformed files") {
  const std::string path = "policy_bad.json";
  {
    std::ofstream out(path);
    out << "{\"format\":\"something-else\"}";
  }
  CHECK_THROWS_AS(PolicyNet::load(path), ConfigError);

  PolicyNet net(6, 4, 8);
  net.init_weights(4);
  net.save(path);
  {
    std::ifstream in(path);
    nlohmann::json j;
    in >> j;
    j["tensors"]["b1"].push_back(0.25);  // wrong length
    std::ofstream out(path);
    out << j;
  }
  CHECK_THROWS_AS(PolicyNet::load(path), ConfigError);
  CHECK_THROWS_AS(PolicyNet::load("no_such_file.json"), ConfigError);
  std::remove(path.c_str());
}

TEST_CASE("sampled actions are in range and carry matching log-probs") {
  PolicyNet net(10, 7, 16);
  net.init_weights(9);
  Rng rng(42);
  Rng rng2(42);
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd s = random_state(10, rng);
    random_state(10, rng2);
    auto sample = net.act(s, rng);
    auto twin = net.act(s, rng2);
    CHECK(sample.allocate >= 0);
    CHECK(sample.allocate <= 1);
    CHECK(sample.move_cell >= 0);
    CHECK(sample.move_cell < 7);
    auto ev = net.evaluate(s);
    CHECK(sample.logp_alloc == doctest::Approx(ev.alloc_logp[sample.allocate]).epsilon(1e-12));
    CHECK(sample.logp_move == doctest::Approx(ev.move_logp[sample.move_cell]).epsilon(1e-12));
    CHECK(sample.value == ev.value);
    // same rng stream, same draw
    CHECK(twin.allocate == sample.allocate);
    CHECK(twin.move_cell == sample.move_cell);
  }
}

TEST_CASE("greedy action picks the modal entry of each head") {
  PolicyNet net(10, 5, 16);
  net.init_weights(31);
  Rng rng(6);
  for (int i = 0; i < 40; ++i) {
    Eigen::VectorXd s = random_state(10, rng);
    auto g = net.act_greedy(s);
    auto ev = net.evaluate(s);
    int best_a = ev.alloc_probs[1] > ev.alloc_probs[0] ? 1 : 0;
    int best_c = 0;
    ev.move_probs.maxCoeff(&best_c);
    CHECK(g.allocate == best_a);
    CHECK(g.move_cell == best_c);
  }
}

TEST_CASE("sampling tracks head probabilities") {
  PolicyNet net(4, 4, 8);
  net.params().setZero();
  Rng rng(77);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(4);
  int ones = 0;
  std::vector<int> cell_counts(4, 0);
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    auto sample = net.act(s, rng);
    ones += sample.allocate;
    cell_counts[sample.move_cell]++;
  }
  CHECK(ones > n * 0.45);
  CHECK(ones < n * 0.55);
  for (int c = 0; c < 4; ++c) {
    CHECK(cell_counts[c] > n * 0.20);
    CHECK(cell_counts[c] < n * 0.30);
  }
}
