// SPDX-License-Identifier: Apache-2.0
#include "swarminfer/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "swarminfer/errors.hpp"

namespace swarminfer {

using Eigen::ArrayXd;
using Eigen::Map;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

void compute_gae(const std::vector<double>& rewards, const std::vector<double>& values,
                 const std::vector<std::uint8_t>& dones, double last_value, double gamma,
                 double lambda, std::vector<double>* advantages, std::vector<double>* returns) {
  const int n = static_cast<int>(rewards.size());
  if (static_cast<int>(values.size()) != n || static_cast<int>(dones.size()) != n)
    throw std::invalid_argument("rollout arrays disagree in length");
  advantages->assign(n, 0.0);
  returns->assign(n, 0.0);
  double carry = 0.0;
  for (int t = n - 1; t >= 0; --t) {
    const double mask = dones[t] ? 0.0 : 1.0;
    const double next_value = (t == n - 1) ? last_value : values[t + 1];
    const double delta = rewards[t] + gamma * next_value * mask - values[t];
    carry = delta + gamma * lambda * mask * carry;
    (*advantages)[t] = carry;
    (*returns)[t] = carry + values[t];
  }
}

RolloutBuffer::RolloutBuffer(int state_dim, int capacity) {
  if (state_dim <= 0 || capacity <= 0)
    throw std::invalid_argument("rollout buffer dimensions must be positive");
  states.resize(state_dim, capacity);
  a1.reserve(capacity);
  a2.reserve(capacity);
  logp.reserve(capacity);
  rewards.reserve(capacity);
  values.reserve(capacity);
  dones.reserve(capacity);
}

void RolloutBuffer::clear() {
  a1.clear();
  a2.clear();
  logp.clear();
  rewards.clear();
  values.clear();
  dones.clear();
  size = 0;
}

void RolloutBuffer::push(const VectorXd& state, int alloc, int move, double logp_joint,
                         double reward, double value, bool done) {
  if (full()) throw std::logic_error("rollout buffer is full");
  states.col(size) = state;
  a1.push_back(alloc);
  a2.push_back(move);
  logp.push_back(logp_joint);
  rewards.push_back(reward);
  values.push_back(value);
  dones.push_back(done ? 1 : 0);
  ++size;
}

namespace {

// row-stacked log-softmax over each column; fills probs and logps in place
void column_softmax(const MatrixXd& logits, MatrixXd* probs, MatrixXd* logps) {
  const RowVectorXd peak = logits.colwise().maxCoeff();
  MatrixXd shifted = logits.rowwise() - peak;
  MatrixXd expv = shifted.array().exp();
  const RowVectorXd total = expv.colwise().sum();
  *logps = shifted.rowwise() - total.array().log().matrix();
  *probs = expv.array().rowwise() / total.array();
}

}  // namespace

LossParts ppo_loss(const PolicyNet& net, const MiniBatch& mb, double clip, double value_coef,
                   double entropy_coef, bool move_head, VectorXd* grad) {
  const int batch = static_cast<int>(mb.states.cols());
  if (batch == 0) throw std::invalid_argument("empty minibatch");
  if (mb.states.rows() != net.state_dim())
    throw std::invalid_argument("minibatch state dimension mismatch");

  const MatrixXd h1 = ((net.w1() * mb.states).colwise() + net.b1()).array().tanh();
  const MatrixXd h2 = ((net.w2() * h1).colwise() + net.b2()).array().tanh();
  MatrixXd pa, lpa, pb, lpb;
  column_softmax((net.wa() * h2).colwise() + net.ba(), &pa, &lpa);
  column_softmax((net.wb() * h2).colwise() + net.bb(), &pb, &lpb);
  const RowVectorXd v = (net.wv() * h2).row(0).array() + net.bv()(0);

  // head entropies per sample
  const RowVectorXd ent_a = -(pa.array() * lpa.array()).colwise().sum();
  const RowVectorXd ent_b = -(pb.array() * lpb.array()).colwise().sum();

  ArrayXd logp_new(batch), entropy(batch);
  for (int i = 0; i < batch; ++i) {
    logp_new[i] = lpa(mb.a1[i], i);
    entropy[i] = ent_a[i];
    if (move_head) {
      logp_new[i] += lpb(mb.a2[i], i);
      entropy[i] += ent_b[i];
    }
  }

  const ArrayXd ratio = (logp_new - mb.logp_old.array()).exp();
  const ArrayXd clipped = ratio.min(1.0 + clip).max(1.0 - clip);
  const ArrayXd u1 = ratio * mb.advantages.array();
  const ArrayXd u2 = clipped * mb.advantages.array();

  LossParts parts;
  parts.policy = -u1.min(u2).mean();
  parts.value = (v.transpose().array() - mb.returns.array()).square().mean();
  parts.entropy = entropy.mean();
  parts.total = parts.policy + value_coef * parts.value - entropy_coef * parts.entropy;
  parts.approx_kl = ((ratio - 1.0) - (logp_new - mb.logp_old.array())).mean();
  parts.clip_fraction = ((ratio - 1.0).abs() > clip).cast<double>().mean();

  if (!grad) return parts;

  grad->setZero(net.param_count());
  const double inv_b = 1.0 / batch;

  // d total / d logits, assembled head by head
  MatrixXd g_la = MatrixXd::Zero(2, batch);
  MatrixXd g_lb = MatrixXd::Zero(net.cells(), batch);
  RowVectorXd g_v(batch);
  for (int i = 0; i < batch; ++i) {
    const double g_lp = (u1[i] <= u2[i]) ? -inv_b * ratio[i] * mb.advantages[i] : 0.0;
    if (g_lp != 0.0) {
      g_la.col(i) = -g_lp * pa.col(i);
      g_la(mb.a1[i], i) += g_lp;
      if (move_head) {
        g_lb.col(i) = -g_lp * pb.col(i);
        g_lb(mb.a2[i], i) += g_lp;
      }
    }
    // maximizing entropy contributes +coef/B * p (log p + H) to the logits
    g_la.col(i) += entropy_coef * inv_b *
                   (pa.col(i).array() * (lpa.col(i).array() + ent_a[i])).matrix();
    if (move_head)
      g_lb.col(i) += entropy_coef * inv_b *
                     (pb.col(i).array() * (lpb.col(i).array() + ent_b[i])).matrix();
    g_v[i] = value_coef * inv_b * 2.0 * (v[i] - mb.returns[i]);
  }

  const MatrixXd d_h2 =
      net.wa().transpose() * g_la + net.wb().transpose() * g_lb + net.wv().transpose() * g_v;
  const MatrixXd g_z2 = d_h2.array() * (1.0 - h2.array().square());
  const MatrixXd d_h1 = net.w2().transpose() * g_z2;
  const MatrixXd g_z1 = d_h1.array() * (1.0 - h1.array().square());

  const auto lay = net.layout();
  const int h = net.hidden();
  Map<MatrixXd>(grad->data() + lay.w1, h, net.state_dim()) = g_z1 * mb.states.transpose();
  Map<VectorXd>(grad->data() + lay.b1, h) = g_z1.rowwise().sum();
  Map<MatrixXd>(grad->data() + lay.w2, h, h) = g_z2 * h1.transpose();
  Map<VectorXd>(grad->data() + lay.b2, h) = g_z2.rowwise().sum();
  Map<MatrixXd>(grad->data() + lay.wa, 2, h) = g_la * h2.transpose();
  Map<VectorXd>(grad->data() + lay.ba, 2) = g_la.rowwise().sum();
  Map<MatrixXd>(grad->data() + lay.wb, net.cells(), h) = g_lb * h2.transpose();
  Map<VectorXd>(grad->data() + lay.bb, net.cells()) = g_lb.rowwise().sum();
  Map<MatrixXd>(grad->data() + lay.wv, 1, h) = g_v * h2.transpose();
  (*grad)[lay.bv] = g_v.sum();
  return parts;
}

double clip_norm(VectorXd& grad, double max_norm) {
  const double norm = grad.norm();
  if (norm > max_norm && norm > 0.0) grad *= max_norm / norm;
  return norm;
}

Adam::Adam(int n) : m(VectorXd::Zero(n)), v(VectorXd::Zero(n)) {}

void Adam::step(VectorXd& params, const VectorXd& grad, double lr) {
  ++t;
  m = beta1 * m + (1.0 - beta1) * grad;
  v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  params -= (lr / c1) * m.cwiseQuotient(((v / c2).cwiseSqrt().array() + eps).matrix());
}

namespace {

bool all_finite(const std::vector<double>& xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

UpdateStats ppo_update(PolicyNet& net, Adam& opt, const RolloutBuffer& buffer, double last_value,
                       const TrainConfig& cfg, Rng& rng) {
  const int n = buffer.size;
  if (n == 0) throw std::invalid_argument("empty rollout buffer");
  if (!buffer.states.leftCols(n).allFinite() || !all_finite(buffer.rewards) ||
      !all_finite(buffer.values) || !all_finite(buffer.logp) || !std::isfinite(last_value))
    throw NumericError("non-finite rollout data");
  if (!net.params().allFinite()) throw NumericError("non-finite network parameters");

  std::vector<double> adv_v, ret_v;
  compute_gae(buffer.rewards, buffer.values, buffer.dones, last_value, cfg.gamma, cfg.gae_lambda,
              &adv_v, &ret_v);
  VectorXd adv = Map<const VectorXd>(adv_v.data(), n);
  const VectorXd ret = Map<const VectorXd>(ret_v.data(), n);
  if (cfg.normalize_advantages) {
    const double mean = adv.mean();
    const double sd = std::sqrt((adv.array() - mean).square().mean());
    adv = (adv.array() - mean) / (sd + 1e-8);
  }

  const bool move_head = !cfg.static_schedule.has_value();
  const int chunks = std::max(1, std::min(cfg.minibatches, n));
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  UpdateStats stats;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (int i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
    if (epoch == cfg.epochs - 1) stats = UpdateStats{};
    int start = 0;
    for (int k = 0; k < chunks; ++k) {
      const int len = n / chunks + (k < n % chunks ? 1 : 0);
      MiniBatch mb;
      mb.states.resize(net.state_dim(), len);
      mb.logp_old.resize(len);
      mb.advantages.resize(len);
      mb.returns.resize(len);
      for (int j = 0; j < len; ++j) {
        const int src = order[start + j];
        mb.states.col(j) = buffer.states.col(src);
        mb.a1.push_back(buffer.a1[src]);
        mb.a2.push_back(buffer.a2[src]);
        mb.logp_old[j] = buffer.logp[src];
        mb.advantages[j] = adv[src];
        mb.returns[j] = ret[src];
      }
      start += len;

      VectorXd grad;
      const LossParts parts =
          ppo_loss(net, mb, cfg.clip, cfg.value_coef, cfg.entropy_coef, move_head, &grad);
      if (!std::isfinite(parts.total) || !grad.allFinite())
        throw NumericError("non-finite loss or gradient");
      clip_norm(grad, cfg.max_grad_norm);
      opt.step(net.params(), grad, cfg.learning_rate);
      if (!net.params().allFinite()) throw NumericError("non-finite parameters after update");

      if (epoch == cfg.epochs - 1) {
        stats.policy_loss += parts.policy / chunks;
        stats.value_loss += parts.value / chunks;
        stats.entropy += parts.entropy / chunks;
        stats.approx_kl += parts.approx_kl / chunks;
        stats.clip_fraction += parts.clip_fraction / chunks;
      }
    }
  }
  return stats;
}

void validate_schedule(const std::vector<Placement>& schedule, const GridConfig& grid, int uavs) {
  if (schedule.empty()) throw ConfigError("flight schedule is empty");
  for (std::size_t w = 0; w < schedule.size(); ++w) {
    const Placement& pl = schedule[w];
    if (static_cast<int>(pl.size()) != uavs)
      throw ConfigError("flight schedule entry " + std::to_string(w) + " lists " +
                        std::to_string(pl.size()) + " cells for " + std::to_string(uavs) +
                        " UAVs");
    std::set<int> seen;
    for (int cell : pl) {
      if (cell < 0 || cell >= grid.cell_count())
        throw ConfigError("flight schedule entry " + std::to_string(w) + " leaves the grid");
      if (!seen.insert(cell).second)
        throw ConfigError("flight schedule entry " + std::to_string(w) +
                          " stacks two UAVs in one cell");
    }
  }
}

namespace {

int scheduled_cell(const std::vector<Placement>& schedule, int layer, int uav) {
  const std::size_t w = std::min<std::size_t>(layer, schedule.size() - 1);
  return schedule[w][uav];
}

EpisodeStat summarize_episode(const SwarmEnv& env, int episode) {
  EpisodeStat st;
  st.episode = episode;
  st.steps = static_cast<int>(env.episode_steps().size());
  st.uavs = env.uav_count();
  st.reward = env.episode_reward();
  st.penalty_s = env.episode_penalty_s();
  st.accuracy = env.episode_accuracy();
  st.coverage = env.episode_coverage();
  st.shared_bytes = env.episode_shared_bytes();
  if (auto plan = env.reconstruct_plan()) {
    st.plan_complete = true;
    const auto& cfg = env.config();
    std::string why;
    ValidateOptions opts;
    opts.check_hot_cells = false;
    if (validate_plan(cfg.network, env.swarm(), cfg.grid, cfg.radio, *plan, opts, &why)) {
      st.latency_s = total_latency(cfg.network, env.swarm(), cfg.grid, cfg.radio, *plan, opts)
                         .total_s;
    } else {
      st.plan_complete = false;
    }
  }
  return st;
}

}  // namespace

TrainResult train(PolicyNet& net, SwarmEnv& env, const TrainConfig& cfg, std::uint64_t seed,
                  const TrainHooks& hooks) {
  if (net.state_dim() != env.state_dim() || net.cells() != env.cell_count())
    throw ConfigError("policy network shaped for a different swarm or grid");
  if (cfg.total_steps <= 0) throw ConfigError("total_steps must be positive");
  if (cfg.static_schedule)
    validate_schedule(*cfg.static_schedule, env.config().grid, env.uav_count());

  Rng act_rng(Rng::derive(seed, 0xac7));
  Rng update_rng(Rng::derive(seed, 0x0bd));
  Adam opt(net.param_count());
  RolloutBuffer buf(net.state_dim(), cfg.batch_size);

  TrainResult out;
  int episode = 0;
  while (out.env_steps < cfg.total_steps) {
    if (hooks.before_episode) hooks.before_episode(episode, env);
    if (env.state_dim() != net.state_dim())
      throw ConfigError("environment state dimension changed mid-training");
    if (cfg.static_schedule &&
        static_cast<int>(cfg.static_schedule->front().size()) != env.uav_count())
      throw ConfigError("flight schedule no longer matches the swarm size");

    std::vector<double> sv = env.reset();
    VectorXd state = Map<const VectorXd>(sv.data(), static_cast<long>(sv.size()));
    while (!env.done()) {
      const PolicyNet::Sample s = net.act(state, act_rng);
      Action a;
      a.allocate = s.allocate;
      a.move_cell = s.move_cell;
      double logp = s.logp_alloc + s.logp_move;
      if (cfg.static_schedule) {
        a.move_cell = scheduled_cell(*cfg.static_schedule, env.cursor_layer(), env.cursor_uav());
        logp = s.logp_alloc;
      }
      const StepResult r = env.step(a);
      buf.push(state, a.allocate, a.move_cell, logp, r.reward, s.value, r.done);
      ++out.env_steps;
      state = Map<const VectorXd>(r.state.data(), static_cast<long>(r.state.size()));
      if (buf.full()) {
        const double last_value = r.done ? 0.0 : net.evaluate(state).value;
        out.last_update = ppo_update(net, opt, buf, last_value, cfg, update_rng);
        ++out.updates;
        buf.clear();
      }
    }

    EpisodeStat st = summarize_episode(env, episode);
    out.episodes.push_back(st);
    if (hooks.after_episode) hooks.after_episode(episode, env, st);
    ++episode;
    if (hooks.should_stop && hooks.should_stop(out.episodes)) break;
  }
  return out;
}

EvalStats evaluate_policy(const PolicyNet& net, SwarmEnv& env, int episodes, bool deterministic,
                          std::uint64_t seed,
                          const std::optional<std::vector<Placement>>& schedule) {
  if (net.state_dim() != env.state_dim() || net.cells() != env.cell_count())
    throw ConfigError("policy network shaped for a different swarm or grid");
  if (episodes <= 0) throw ConfigError("evaluation needs at least one episode");
  if (schedule) validate_schedule(*schedule, env.config().grid, env.uav_count());

  Rng rng(Rng::derive(seed, 0xe7a1));
  EvalStats out;
  out.episodes = episodes;
  double latency_sum = 0.0;
  for (int ep = 0; ep < episodes; ++ep) {
    std::vector<double> sv = env.reset();
    VectorXd state = Map<const VectorXd>(sv.data(), static_cast<long>(sv.size()));
    while (!env.done()) {
      const PolicyNet::Sample s = deterministic ? net.act_greedy(state) : net.act(state, rng);
      Action a;
      a.allocate = s.allocate;
      a.move_cell =
          schedule ? scheduled_cell(*schedule, env.cursor_layer(), env.cursor_uav()) : s.move_cell;
      const StepResult r = env.step(a);
      state = Map<const VectorXd>(r.state.data(), static_cast<long>(r.state.size()));
    }
    const EpisodeStat st = summarize_episode(env, ep);
    out.mean_reward += st.reward / episodes;
    out.mean_accuracy += st.accuracy / episodes;
    out.mean_coverage += st.coverage / episodes;
    out.mean_penalty_s += st.penalty_s / episodes;
    if (st.plan_complete) {
      ++out.complete_plans;
      latency_sum += st.latency_s;
    }
  }
  if (out.complete_plans > 0) out.mean_latency_s = latency_sum / out.complete_plans;
  return out;
}

}  // namespace swarminfer
