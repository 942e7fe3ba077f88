// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "swarminfer/rng.hpp"

namespace swarminfer {

// two tanh trunk layers feeding an allocation head (2 logits), a movement head
// (one logit per cell), and a scalar value head; parameters live in one flat
// vector so optimizers, checkpoints, and finite-difference checks share a view
class PolicyNet {
 public:
  PolicyNet(int state_dim, int cells, int hidden = 64);

  void init_weights(std::uint64_t seed);

  int state_dim() const { return state_dim_; }
  int cells() const { return cells_; }
  int hidden() const { return hidden_; }
  int param_count() const { return static_cast<int>(params_.size()); }
  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  // segment offsets into the flat vector, for mapping gradients the same way
  struct Layout {
    int w1, b1, w2, b2, wa, ba, wb, bb, wv, bv;
  };
  Layout layout() const;

  struct Eval {
    Eigen::Vector2d alloc_probs;
    Eigen::VectorXd move_probs;
    Eigen::Vector2d alloc_logp;
    Eigen::VectorXd move_logp;
    double value = 0.0;
  };
  Eval evaluate(const Eigen::VectorXd& state) const;

  struct Sample {
    int allocate = 0;
    int move_cell = 0;
    double logp_alloc = 0.0;
    double logp_move = 0.0;
    double value = 0.0;
  };
  Sample act(const Eigen::VectorXd& state, Rng& rng) const;
  Sample act_greedy(const Eigen::VectorXd& state) const;

  void save(const std::string& path) const;
  static PolicyNet load(const std::string& path);

  // flat-vector segment views, shared by forward, backward, and serialization
  Eigen::Map<Eigen::MatrixXd> w1();
  Eigen::Map<Eigen::MatrixXd> w2();
  Eigen::Map<Eigen::MatrixXd> wa();
  Eigen::Map<Eigen::MatrixXd> wb();
  Eigen::Map<Eigen::MatrixXd> wv();
  Eigen::Map<Eigen::VectorXd> b1();
  Eigen::Map<Eigen::VectorXd> b2();
  Eigen::Map<Eigen::VectorXd> ba();
  Eigen::Map<Eigen::VectorXd> bb();
  Eigen::Map<Eigen::VectorXd> bv();
  Eigen::Map<const Eigen::MatrixXd> w1() const;
  Eigen::Map<const Eigen::MatrixXd> w2() const;
  Eigen::Map<const Eigen::MatrixXd> wa() const;
  Eigen::Map<const Eigen::MatrixXd> wb() const;
  Eigen::Map<const Eigen::MatrixXd> wv() const;
  Eigen::Map<const Eigen::VectorXd> b1() const;
  Eigen::Map<const Eigen::VectorXd> b2() const;
  Eigen::Map<const Eigen::VectorXd> ba() const;
  Eigen::Map<const Eigen::VectorXd> bb() const;
  Eigen::Map<const Eigen::VectorXd> bv() const;

 private:
  int state_dim_, cells_, hidden_;
  int off_w1_, off_b1_, off_w2_, off_b2_, off_wa_, off_ba_, off_wb_, off_bb_, off_wv_, off_bv_;
  Eigen::VectorXd params_;
};

}  // namespace swarminfer
