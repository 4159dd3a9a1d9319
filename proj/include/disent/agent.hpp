// Copyright 2026 The disent Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DISENT_AGENT_HPP
#define DISENT_AGENT_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "disent/circuit.hpp"
#include "disent/mlp.hpp"
#include "disent/models.hpp"
#include "disent/optimizer.hpp"
#include "disent/replay.hpp"
#include "disent/rng.hpp"
#include "disent/state.hpp"

namespace disent {

/// Terminal reward: relative entropy reduction against the bare ground-state
/// value, clipped at zero when the circuit made things worse. Non-terminal
/// steps pay zero.
inline double terminal_reward(double baseline, double achieved) {
  if (!std::isfinite(baseline) || !std::isfinite(achieved))
    throw std::invalid_argument("terminal_reward: entropies must be finite");
  if (baseline < 0.0 || achieved < 0.0) throw std::invalid_argument("terminal_reward: entropies must be non-negative");
  if (baseline <= 0.0) return 0.0;
  if (achieved >= baseline) return 0.0;
  double r = (baseline - achieved) / baseline;
  return std::min(1.0, std::max(0.0, r));
}

struct TrainConfig {
  int episodes = 2000;
  int minibatch = 120;
  int replay_capacity = 100000;
  double learning_rate = 1e-4;
  double discount = 0.99;
  /// Target-network refresh period, counted in learning steps.
  int target_update_period = 100;
  double eps_start = 1.0;
  double eps_final = 0.05;
  double per_alpha = 0.6;
  double per_beta_start = 0.4;
  double per_beta_final = 1.0;
  double per_epsilon = 1e-3;
  /// Stop after this many episodes without a new best reward.
  int stagnation_limit = 200;
  std::vector<int> hidden = {512, 512, 512, 512, 512, 512};
  /// Angle optimization used for the terminal evaluation of each episode.
  OptimizeConfig angle_opt;
  double solver_tol = 1e-10;
  std::uint64_t seed = 1;
};

inline void validate_train_config(const TrainConfig& cfg) {
  if (cfg.episodes < 1) throw std::invalid_argument("TrainConfig: episodes must be positive");
  if (cfg.minibatch < 1) throw std::invalid_argument("TrainConfig: minibatch must be positive");
  if (cfg.replay_capacity < cfg.minibatch)
    throw std::invalid_argument("TrainConfig: replay capacity must hold at least one minibatch");
  if (cfg.discount < 0.0 || cfg.discount > 1.0) throw std::invalid_argument("TrainConfig: discount must be in [0, 1]");
  if (cfg.target_update_period < 1) throw std::invalid_argument("TrainConfig: target update period must be positive");
  if (cfg.stagnation_limit < 1) throw std::invalid_argument("TrainConfig: stagnation limit must be positive");
  if (cfg.hidden.empty()) throw std::invalid_argument("TrainConfig: need at least one hidden layer");
}

/// Episode environment: the agent appends gates to a window circuit; the
/// reward arrives only when all slots are used, after optimizing the rotation
/// angles of the assembled architecture. Identical architectures are
/// evaluated once and memoized (the angle optimization is deterministic).
class CircuitEnv {
 public:
  CircuitEnv(PureState ground, const WindowSpec& window, int layers, const OptimizeConfig& angle_opt)
      : ground_(std::move(ground)), angle_opt_(angle_opt) {
    arch_ = make_architecture(window, layers);
    if (ground_.n_sites != window.n_sites) throw std::invalid_argument("CircuitEnv: state size does not match window");
    n_actions_ = static_cast<int>(action_space(window).size());
    baseline_ = entropy_of_site(ground_, window.target);
  }

  int action_count() const { return n_actions_; }
  int horizon() const { return arch_.horizon; }
  double baseline_entropy() const { return baseline_; }
  const PureState& ground() const { return ground_; }
  const CircuitArchitecture& architecture() const { return arch_; }

  void reset() {
    arch_.actions.clear();
    done_ = false;
  }

  bool done() const { return done_; }

  Eigen::VectorXd encoding() const { return encode(arch_); }

  struct Step {
    double reward = 0.0;
    bool done = false;
    bool terminal_failed = false;
    double entropy = std::numeric_limits<double>::quiet_NaN();
    Eigen::VectorXd params;
  };

  Step step(int action) {
    if (done_) throw std::logic_error("CircuitEnv::step: episode already finished, call reset()");
    if (action < 0 || action >= n_actions_) throw std::invalid_argument("CircuitEnv::step: action id out of range");
    arch_.actions.push_back(action);
    Step out;
    if (static_cast<int>(arch_.actions.size()) < arch_.horizon) return out;

    done_ = true;
    out.done = true;
    auto it = memo_.find(arch_.actions);
    if (it == memo_.end()) {
      Memo entry;
      try {
        OptimizeResult opt = minimize_entropy(ground_, arch_, angle_opt_);
        entry.entropy = opt.entropy;
        entry.params = opt.params;
        entry.failed = false;
      } catch (const std::runtime_error&) {
        entry.failed = true;
      }
      it = memo_.emplace(arch_.actions, std::move(entry)).first;
    }
    if (it->second.failed) {
      out.terminal_failed = true;
      return out;
    }
    out.entropy = it->second.entropy;
    out.params = it->second.params;
    out.reward = terminal_reward(baseline_, out.entropy);
    return out;
  }

 private:
  struct Memo {
    double entropy = 0.0;
    Eigen::VectorXd params;
    bool failed = false;
  };

  PureState ground_;
  CircuitArchitecture arch_;
  OptimizeConfig angle_opt_;
  int n_actions_ = 0;
  double baseline_ = 0.0;
  bool done_ = false;
  std::map<std::vector<int>, Memo> memo_;
};

/// Epsilon-greedy action choice. Exploration consumes one uniform draw, and
/// a second one when it explores; ties in the greedy branch resolve to the
/// lowest action id.
inline int epsilon_greedy(const Mlp& net, const Eigen::VectorXd& state_enc, double eps, int n_actions, Rng& rng) {
  if (n_actions < 1) throw std::invalid_argument("epsilon_greedy: need at least one action");
  if (eps < 0.0 || eps > 1.0) throw std::invalid_argument("epsilon_greedy: eps must be in [0, 1]");
  if (rng.uniform() < eps) return rng.uniform_int(n_actions);
  Eigen::VectorXd q = net.forward_one(state_enc);
  if (q.size() != n_actions) throw std::invalid_argument("epsilon_greedy: network output size mismatch");
  int best = 0;
  for (int a = 1; a < n_actions; ++a) {
    if (q[a] > q[best]) best = a;
  }
  return best;
}

struct TrainBatch {
  Eigen::MatrixXd states;
  Eigen::MatrixXd next_states;
  std::vector<int> actions;
  Eigen::VectorXd rewards;
  std::vector<char> done;
  Eigen::VectorXd weights;
};

struct TrainStepResult {
  double loss = 0.0;
  Eigen::VectorXd td_errors;
};

/// One importance-weighted TD(0) update. Targets bootstrap from the target
/// network except on terminal transitions; the loss is the weighted mean
/// squared TD error.
inline TrainStepResult dqn_train_step(Mlp& online, const Mlp& target, const TrainBatch& batch, double discount,
                                      Adam& adam) {
  const Eigen::Index b = batch.states.rows();
  if (b < 1) throw std::invalid_argument("dqn_train_step: empty batch");
  if (batch.next_states.rows() != b || static_cast<Eigen::Index>(batch.actions.size()) != b ||
      batch.rewards.size() != b || static_cast<Eigen::Index>(batch.done.size()) != b || batch.weights.size() != b)
    throw std::invalid_argument("dqn_train_step: batch field lengths differ");

  Mlp::Cache cache;
  Eigen::MatrixXd q = online.forward(batch.states, &cache);
  Eigen::MatrixXd q_next = target.forward(batch.next_states);

  TrainStepResult out;
  out.td_errors.resize(b);
  Eigen::MatrixXd dout = Eigen::MatrixXd::Zero(q.rows(), q.cols());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < b; ++i) {
    int a = batch.actions[i];
    if (a < 0 || a >= q.cols()) throw std::invalid_argument("dqn_train_step: action id out of range");
    double y = batch.rewards[i];
    if (!batch.done[i]) y += discount * q_next.row(i).maxCoeff();
    double delta = y - q(i, a);
    out.td_errors[i] = delta;
    double w = batch.weights[i];
    loss += w * delta * delta;
    dout(i, a) = -2.0 * w * delta / static_cast<double>(b);
  }
  out.loss = loss / static_cast<double>(b);

  MlpGradients grads = online.backward(cache, dout);
  adam.step(online, grads);
  return out;
}

struct EpisodeRow {
  int episode = 0;
  double reward = 0.0;
  double s_rl = std::numeric_limits<double>::quiet_NaN();
  double epsilon = 0.0;
  double loss_mean = std::numeric_limits<double>::quiet_NaN();
};

struct TrainResult {
  CircuitArchitecture best_architecture;
  Eigen::VectorXd best_params;
  double best_reward = -1.0;
  double best_entropy = std::numeric_limits<double>::quiet_NaN();
  int best_episode = -1;
  double baseline_entropy = 0.0;
  double ground_energy = 0.0;
  std::vector<EpisodeRow> log;
  int episodes_run = 0;
  int learn_steps = 0;
};

namespace detail {

inline void encode_prefix_into(const WindowSpec& window, int horizon, int n_actions,
                               std::span<const std::uint8_t> prefix, int extra_action,
                               Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row) {
  const int block = n_actions + 1;
  row.setZero();
  int t = 0;
  for (std::uint8_t a : prefix) row[t++ * block + a] = 1.0;
  if (extra_action >= 0 && t < horizon) row[t++ * block + extra_action] = 1.0;
  for (; t < horizon; ++t) row[t * block + n_actions] = 1.0;
  (void)window;
}

}  // namespace detail

/// Deep Q-learning over circuit architectures for one chain at one coupling.
/// Linear epsilon decay over the first half of the episode budget, annealed
/// prioritized replay, and a target network refreshed every
/// `target_update_period` learning steps. Stops early once the best reward
/// has stagnated for `stagnation_limit` episodes. Fully deterministic for a
/// fixed config.
inline TrainResult train_agent(const ModelSpec& model, const WindowSpec& window, int layers,
                               const TrainConfig& cfg) {
  validate_train_config(cfg);
  validate_window(window);
  if (window.n_sites != model.n_sites) throw std::invalid_argument("train_agent: window does not match model size");
  if (layers < 1) throw std::invalid_argument("train_agent: layer count must be positive");

  GroundStateResult gs = ground_state(model, cfg.solver_tol, cfg.seed);
  CircuitEnv env(gs.state, window, layers, cfg.angle_opt);
  const int n_actions = env.action_count();
  const int horizon = env.horizon();
  const int input_dim = horizon * (n_actions + 1);

  std::vector<int> dims;
  dims.push_back(input_dim);
  for (int h : cfg.hidden) dims.push_back(h);
  dims.push_back(n_actions);
  Mlp online = Mlp::make(dims, cfg.seed);
  Mlp target = online;
  Adam adam(cfg.learning_rate);

  ReplayBuffer buffer(cfg.replay_capacity, cfg.per_alpha, cfg.per_epsilon);
  Rng explore_rng = Rng::stream(cfg.seed, "agent-explore");
  Rng sample_rng = Rng::stream(cfg.seed, "per-sample");

  TrainResult result;
  result.baseline_entropy = env.baseline_entropy();
  result.ground_energy = gs.energy;

  const int half = std::max(1, cfg.episodes / 2);
  const int beta_span = std::max(1, cfg.episodes - 1);
  TrainBatch batch;
  batch.states.resize(cfg.minibatch, input_dim);
  batch.next_states.resize(cfg.minibatch, input_dim);
  batch.actions.resize(cfg.minibatch);
  batch.rewards.resize(cfg.minibatch);
  batch.done.resize(cfg.minibatch);

  int stagnation = 0;
  for (int ep = 0; ep < cfg.episodes; ++ep) {
    double frac = std::min(1.0, static_cast<double>(ep) / half);
    double eps = cfg.eps_start + (cfg.eps_final - cfg.eps_start) * frac;
    double beta = cfg.per_beta_start +
                  (cfg.per_beta_final - cfg.per_beta_start) * std::min(1.0, static_cast<double>(ep) / beta_span);

    env.reset();
    double ep_reward = 0.0;
    double ep_entropy = std::numeric_limits<double>::quiet_NaN();
    bool failed = false;
    Eigen::VectorXd ep_params;
    double loss_sum = 0.0;
    int loss_count = 0;

    for (int t = 0; t < horizon; ++t) {
      Eigen::VectorXd s_enc = env.encoding();
      int a = epsilon_greedy(online, s_enc, eps, n_actions, explore_rng);

      StoredTransition tr;
      tr.prefix.assign(env.architecture().actions.begin(), env.architecture().actions.end());
      tr.action = static_cast<std::uint8_t>(a);
      CircuitEnv::Step st = env.step(a);
      tr.reward = st.reward;
      tr.done = st.done;
      buffer.insert(std::move(tr));
      if (st.done) {
        ep_reward = st.reward;
        failed = st.terminal_failed;
        ep_entropy = st.entropy;
        ep_params = st.params;
      }

      if (buffer.size() >= cfg.minibatch) {
        ReplayBuffer::Sample sample = buffer.sample(cfg.minibatch, beta, sample_rng);
        for (int i = 0; i < cfg.minibatch; ++i) {
          const StoredTransition& s = buffer.transition(sample.indices[i]);
          detail::encode_prefix_into(window, horizon, n_actions, s.prefix, -1, batch.states.row(i));
          detail::encode_prefix_into(window, horizon, n_actions, s.prefix, s.action, batch.next_states.row(i));
          batch.actions[i] = s.action;
          batch.rewards[i] = s.reward;
          batch.done[i] = s.done ? 1 : 0;
        }
        batch.weights = sample.weights;
        TrainStepResult step = dqn_train_step(online, target, batch, cfg.discount, adam);
        buffer.update_priorities(sample.indices,
                                 std::span<const double>(step.td_errors.data(), step.td_errors.size()));
        loss_sum += step.loss;
        ++loss_count;
        ++result.learn_steps;
        if (result.learn_steps % cfg.target_update_period == 0) target = online;
      }
    }

    EpisodeRow row;
    row.episode = ep;
    row.reward = failed ? 0.0 : ep_reward;
    row.s_rl = ep_entropy;
    row.epsilon = eps;
    row.loss_mean = loss_count > 0 ? loss_sum / loss_count : std::numeric_limits<double>::quiet_NaN();
    result.log.push_back(row);
    result.episodes_run = ep + 1;

    if (!failed && ep_reward > result.best_reward) {
      result.best_reward = ep_reward;
      result.best_architecture = env.architecture();
      result.best_params = ep_params;
      result.best_entropy = ep_entropy;
      result.best_episode = ep;
      stagnation = 0;
    } else {
      ++stagnation;
      if (stagnation >= cfg.stagnation_limit) break;
    }
  }

  if (result.best_episode < 0) throw std::runtime_error("train_agent: no episode produced a usable circuit");
  return result;
}

inline void write_training_log(std::ostream& os, std::span<const EpisodeRow> rows) {
  os << "episode,reward,S_RL,epsilon,loss_mean\n";
  for (const EpisodeRow& r : rows) {
    os << r.episode << "," << detail::format_g17(r.reward) << "," << detail::format_g17(r.s_rl) << ","
       << detail::format_g17(r.epsilon) << "," << detail::format_g17(r.loss_mean) << "\n";
  }
  if (!os) throw std::runtime_error("write_training_log: write failed");
}

inline std::vector<EpisodeRow> read_training_log(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "episode,reward,S_RL,epsilon,loss_mean")
    throw std::runtime_error("read_training_log: bad header");
  std::vector<EpisodeRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    // The stream extractor rejects "nan", which failed episodes produce, so
    // fields go through strtod instead.
    auto as_double = [&](const std::string& s) {
      char* end = nullptr;
      double v = std::strtod(s.c_str(), &end);
      if (end == s.c_str() || *end != '\0')
        throw std::runtime_error("read_training_log: malformed row '" + line + "'");
      return v;
    };
    if (fields.size() != 5) throw std::runtime_error("read_training_log: malformed row '" + line + "'");
    EpisodeRow r;
    r.episode = static_cast<int>(as_double(fields[0]));
    r.reward = as_double(fields[1]);
    r.s_rl = as_double(fields[2]);
    r.epsilon = as_double(fields[3]);
    r.loss_mean = as_double(fields[4]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace disent

#endif
