// SPDX-License-Identifier: Apache-2.0
#include "swarminfer/policy.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "swarminfer/errors.hpp"

namespace swarminfer {

using Eigen::Map;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

PolicyNet::PolicyNet(int state_dim, int cells, int hidden)
    : state_dim_(state_dim), cells_(cells), hidden_(hidden) {
  if (state_dim <= 0 || cells <= 0 || hidden <= 0)
    throw std::invalid_argument("PolicyNet dimensions must be positive");
  int off = 0;
  auto claim = [&off](int n) {
    const int at = off;
    off += n;
    return at;
  };
  off_w1_ = claim(hidden_ * state_dim_);
  off_b1_ = claim(hidden_);
  off_w2_ = claim(hidden_ * hidden_);
  off_b2_ = claim(hidden_);
  off_wa_ = claim(2 * hidden_);
  off_ba_ = claim(2);
  off_wb_ = claim(cells_ * hidden_);
  off_bb_ = claim(cells_);
  off_wv_ = claim(hidden_);
  off_bv_ = claim(1);
  params_ = VectorXd::Zero(off);
}

PolicyNet::Layout PolicyNet::layout() const {
  return {off_w1_, off_b1_, off_w2_, off_b2_, off_wa_, off_ba_, off_wb_, off_bb_, off_wv_, off_bv_};
}

Map<MatrixXd> PolicyNet::w1() { return {params_.data() + off_w1_, hidden_, state_dim_}; }
Map<MatrixXd> PolicyNet::w2() { return {params_.data() + off_w2_, hidden_, hidden_}; }
Map<MatrixXd> PolicyNet::wa() { return {params_.data() + off_wa_, 2, hidden_}; }
Map<MatrixXd> PolicyNet::wb() { return {params_.data() + off_wb_, cells_, hidden_}; }
Map<MatrixXd> PolicyNet::wv() { return {params_.data() + off_wv_, 1, hidden_}; }
Map<VectorXd> PolicyNet::b1() { return {params_.data() + off_b1_, hidden_}; }
Map<VectorXd> PolicyNet::b2() { return {params_.data() + off_b2_, hidden_}; }
Map<VectorXd> PolicyNet::ba() { return {params_.data() + off_ba_, 2}; }
Map<VectorXd> PolicyNet::bb() { return {params_.data() + off_bb_, cells_}; }
Map<VectorXd> PolicyNet::bv() { return {params_.data() + off_bv_, 1}; }
Map<const MatrixXd> PolicyNet::w1() const { return {params_.data() + off_w1_, hidden_, state_dim_}; }
Map<const MatrixXd> PolicyNet::w2() const { return {params_.data() + off_w2_, hidden_, hidden_}; }
Map<const MatrixXd> PolicyNet::wa() const { return {params_.data() + off_wa_, 2, hidden_}; }
Map<const MatrixXd> PolicyNet::wb() const { return {params_.data() + off_wb_, cells_, hidden_}; }
Map<const MatrixXd> PolicyNet::wv() const { return {params_.data() + off_wv_, 1, hidden_}; }
Map<const VectorXd> PolicyNet::b1() const { return {params_.data() + off_b1_, hidden_}; }
Map<const VectorXd> PolicyNet::b2() const { return {params_.data() + off_b2_, hidden_}; }
Map<const VectorXd> PolicyNet::ba() const { return {params_.data() + off_ba_, 2}; }
Map<const VectorXd> PolicyNet::bb() const { return {params_.data() + off_bb_, cells_}; }
Map<const VectorXd> PolicyNet::bv() const { return {params_.data() + off_bv_, 1}; }

namespace {

// semi-orthogonal rows/columns scaled by gain, deterministic in the seed
MatrixXd orthogonal(int rows, int cols, double gain, Rng& rng) {
  const bool tall = rows >= cols;
  const int r = tall ? rows : cols;
  const int c = tall ? cols : rows;
  MatrixXd a(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) a(i, j) = rng.normal();
  Eigen::HouseholderQR<MatrixXd> qr(a);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(r, c);
  const MatrixXd rmat = qr.matrixQR().topRows(c).triangularView<Eigen::Upper>();
  for (int j = 0; j < c; ++j)
    if (rmat(j, j) < 0.0) q.col(j) = -q.col(j);
  q *= gain;
  return tall ? q : MatrixXd(q.transpose());
}

VectorXd softmax_from_logits(const VectorXd& logits, VectorXd* logp) {
  const double peak = logits.maxCoeff();
  const VectorXd shifted = logits.array() - peak;
  const VectorXd expv = shifted.array().exp();
  const double total = expv.sum();
  if (logp) *logp = shifted.array() - std::log(total);
  return expv / total;
}

}  // namespace

void PolicyNet::init_weights(std::uint64_t seed) {
  Rng rng(Rng::derive(seed, 0xfeed));
  const double trunk_gain = std::sqrt(2.0);
  w1() = orthogonal(hidden_, state_dim_, trunk_gain, rng);
  w2() = orthogonal(hidden_, hidden_, trunk_gain, rng);
  wa() = orthogonal(2, hidden_, 0.01, rng);
  wb() = orthogonal(cells_, hidden_, 0.01, rng);
  wv() = orthogonal(1, hidden_, 1.0, rng);
  b1().setZero();
  b2().setZero();
  ba().setZero();
  bb().setZero();
  bv().setZero();
}

PolicyNet::Eval PolicyNet::evaluate(const VectorXd& state) const {
  if (state.size() != state_dim_)
    throw std::invalid_argument("state of length " + std::to_string(state.size()) +
                                ", network expects " + std::to_string(state_dim_));
  const VectorXd h1 = (w1() * state + b1()).array().tanh();
  const VectorXd h2 = (w2() * h1 + b2()).array().tanh();
  Eval out;
  VectorXd alog, blog;
  const VectorXd pa = softmax_from_logits(wa() * h2 + ba(), &alog);
  out.move_probs = softmax_from_logits(wb() * h2 + bb(), &blog);
  out.alloc_probs = pa;
  out.alloc_logp = alog;
  out.move_logp = blog;
  out.value = (wv() * h2 + bv())(0);
  return out;
}

PolicyNet::Sample PolicyNet::act(const VectorXd& state, Rng& rng) const {
  const Eval e = evaluate(state);
  Sample s;
  s.allocate = rng.uniform() < e.alloc_probs(1) ? 1 : 0;
  double u = rng.uniform();
  s.move_cell = cells_ - 1;
  for (int c = 0; c < cells_; ++c) {
    u -= e.move_probs(c);
    if (u <= 0.0) {
      s.move_cell = c;
      break;
    }
  }
  s.logp_alloc = e.alloc_logp(s.allocate);
  s.logp_move = e.move_logp(s.move_cell);
  s.value = e.value;
  return s;
}

PolicyNet::Sample PolicyNet::act_greedy(const VectorXd& state) const {
  const Eval e = evaluate(state);
  Sample s;
  s.allocate = e.alloc_probs(1) > e.alloc_probs(0) ? 1 : 0;
  e.move_probs.maxCoeff(&s.move_cell);
  s.logp_alloc = e.alloc_logp(s.allocate);
  s.logp_move = e.move_logp(s.move_cell);
  s.value = e.value;
  return s;
}

namespace {
json matrix_rows(const Map<const MatrixXd>& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

void read_matrix(const json& rows, Map<MatrixXd> m, const std::string& name) {
  if (!rows.is_array() || static_cast<int>(rows.size()) != m.rows())
    throw ConfigError("checkpoint tensor '" + name + "' has the wrong row count");
  for (int i = 0; i < m.rows(); ++i) {
    const json& row = rows[i];
    if (!row.is_array() || static_cast<int>(row.size()) != m.cols())
      throw ConfigError("checkpoint tensor '" + name + "' has the wrong column count");
    for (int j = 0; j < m.cols(); ++j) m(i, j) = row[j].get<double>();
  }
}

void read_vector(const json& arr, Map<VectorXd> v, const std::string& name) {
  if (!arr.is_array() || static_cast<int>(arr.size()) != v.size())
    throw ConfigError("checkpoint tensor '" + name + "' has the wrong length");
  for (int i = 0; i < v.size(); ++i) v(i) = arr[i].get<double>();
}
}  // namespace

void PolicyNet::save(const std::string& path) const {
  json doc;
  doc["format"] = "swarminfer-policy";
  doc["version"] = 1;
  doc["state_dim"] = state_dim_;
  doc["cells"] = cells_;
  doc["hidden"] = hidden_;
  json t;
  t["w1"] = matrix_rows(w1());
  t["b1"] = json(std::vector<double>(b1().data(), b1().data() + hidden_));
  t["w2"] = matrix_rows(w2());
  t["b2"] = json(std::vector<double>(b2().data(), b2().data() + hidden_));
  t["wa"] = matrix_rows(wa());
  t["ba"] = json(std::vector<double>(ba().data(), ba().data() + 2));
  t["wb"] = matrix_rows(wb());
  t["bb"] = json(std::vector<double>(bb().data(), bb().data() + cells_));
  t["wv"] = matrix_rows(wv());
  t["bv"] = json(std::vector<double>(bv().data(), bv().data() + 1));
  doc["tensors"] = std::move(t);
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write checkpoint '" + path + "'");
  out << doc.dump();
}

PolicyNet PolicyNet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("checkpoint parse error: ") + e.what());
  }
  if (doc.value("format", "") != "swarminfer-policy")
    throw ConfigError("'" + path + "' is not a policy checkpoint");
  if (doc.value("version", 0) != 1) throw ConfigError("unsupported checkpoint version");
  for (const char* key : {"state_dim", "cells", "hidden", "tensors"})
    if (!doc.contains(key)) throw ConfigError("checkpoint missing '" + std::string(key) + "'");
  PolicyNet net(doc["state_dim"].get<int>(), doc["cells"].get<int>(), doc["hidden"].get<int>());
  const json& t = doc["tensors"];
  read_matrix(t.at("w1"), net.w1(), "w1");
  read_vector(t.at("b1"), net.b1(), "b1");
  read_matrix(t.at("w2"), net.w2(), "w2");
  read_vector(t.at("b2"), net.b2(), "b2");
  read_matrix(t.at("wa"), net.wa(), "wa");
  read_vector(t.at("ba"), net.ba(), "ba");
  read_matrix(t.at("wb"), net.wb(), "wb");
  read_vector(t.at("bb"), net.bb(), "bb");
  read_matrix(t.at("wv"), net.wv(), "wv");
  read_vector(t.at("bv"), net.bv(), "bv");
  return net;
}

}  // namespace swarminfer
