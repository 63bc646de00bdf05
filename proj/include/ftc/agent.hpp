#pragma once

// PPO actor-critic for the six-valve action space. A shared tanh trunk
// feeds a policy branch (six Bernoulli logits) and a value branch.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "json.hpp"

#include "ftc/nn.hpp"
#include "ftc/random.hpp"
#include "ftc/sim.hpp"

namespace ftc {

using ProbabilityVector = std::array<double, kTanks>;

struct PpoConfig {
  double learning_rate = 1e-2;
  std::size_t t_update = 128;
  double clip_epsilon = 0.2;
  double gamma = 0.99;
  std::size_t epochs_per_update = 4;
  std::size_t minibatch_count = 4;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  // Global gradient-norm clip; 0 disables.
  double max_grad_norm = 0.5;
  bool normalize_advantages = true;

  void validate() const {
    if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) throw std::invalid_argument("clip_epsilon must lie in (0, 1)");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
    if (t_update == 0 || epochs_per_update == 0 || minibatch_count == 0) {
      throw std::invalid_argument("PPO counts must be positive");
    }
    if (minibatch_count > t_update) throw std::invalid_argument("more minibatches than buffered steps");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
    if (value_coef < 0.0 || entropy_coef < 0.0 || max_grad_norm < 0.0) {
      throw std::invalid_argument("PPO coefficients must be >= 0");
    }
  }
};

struct ActorCriticParams {
  nn::MlpParams trunk;   // 6 → 64 → 64, tanh throughout
  nn::MlpParams policy;  // 64 → 16 → 16 → 6 logits
  nn::MlpParams value;   // 64 → 16 → 16 → 1

  friend bool operator==(const ActorCriticParams&, const ActorCriticParams&) = default;
};

struct ActorCriticShape {
  std::size_t trunk_width = 64;
  std::size_t branch_width = 16;
};

/// Glorot init; the final policy layer is scaled by `policy_output_scale`
/// so the initial policy opens each valve with probability close to 1/2.
inline ActorCriticParams init_actor_critic(std::uint64_t seed, ActorCriticShape shape = {},
                                           double policy_output_scale = 0.01) {
  using nn::Activation;
  const std::size_t t = shape.trunk_width;
  const std::size_t b = shape.branch_width;
  ActorCriticParams p{
      nn::init_params({{kTanks, t, t}, Activation::tanh, Activation::tanh}, derive_seed(seed, 11)),
      nn::init_params({{t, b, b, kTanks}, Activation::tanh, Activation::identity}, derive_seed(seed, 12)),
      nn::init_params({{t, b, b, 1}, Activation::tanh, Activation::identity}, derive_seed(seed, 13)),
  };
  const std::size_t last = p.policy.spec().layers() - 1;
  p.policy.weight(last) *= policy_output_scale;
  return p;
}

inline double logistic(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

inline double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

struct PolicyOutput {
  ProbabilityVector logits{};
  ProbabilityVector probabilities{};
  double value = 0.0;
};

inline nn::Matrix state_batch(std::span<const SystemState> states) {
  nn::Matrix x(static_cast<Eigen::Index>(kTanks), static_cast<Eigen::Index>(states.size()));
  for (std::size_t c = 0; c < states.size(); ++c) {
    for (std::size_t i = 0; i < kTanks; ++i) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = states[c].levels[i];
    }
  }
  return x;
}

inline PolicyOutput policy_forward(const ActorCriticParams& params, const SystemState& state) {
  const nn::Matrix x = state_batch(std::span<const SystemState>(&state, 1));
  const nn::Matrix h = nn::predict(params.trunk, x);
  const nn::Matrix logits = nn::predict(params.policy, h);
  PolicyOutput out;
  for (std::size_t i = 0; i < kTanks; ++i) {
    out.logits[i] = logits(static_cast<Eigen::Index>(i), 0);
    out.probabilities[i] = logistic(out.logits[i]);
  }
  out.value = nn::predict(params.value, h)(0, 0);
  return out;
}

inline double value_estimate(const ActorCriticParams& params, const SystemState& state) {
  const nn::Matrix x = state_batch(std::span<const SystemState>(&state, 1));
  return nn::predict(params.value, nn::predict(params.trunk, x))(0, 0);
}

/// log P(u) under independent Bernoulli valves with the given probabilities.
inline double action_log_prob(const ProbabilityVector& p, const ValveAction& action) {
  double lp = 0.0;
  for (std::size_t i = 0; i < kTanks; ++i) lp += action.open[i] ? std::log(p[i]) : std::log1p(-p[i]);
  return lp;
}

struct SampledAction {
  ValveAction action;
  double log_prob = 0.0;
};

inline SampledAction sample_action(const ProbabilityVector& p, Rng& rng) {
  SampledAction s;
  for (std::size_t i = 0; i < kTanks; ++i) s.action.open[i] = uniform01(rng) < p[i];
  s.log_prob = action_log_prob(p, s.action);
  return s;
}

/// Discounted returns R_t = r_t + γ R_{t+1}, restarting at episode ends.
/// If the sequence ends mid-episode the tail is seeded with `bootstrap_value`.
inline std::vector<double> compute_returns(std::span<const double> rewards, const std::vector<bool>& dones,
                                           double gamma, double bootstrap_value = 0.0) {
  if (rewards.size() != dones.size()) throw std::invalid_argument("compute_returns: length mismatch");
  std::vector<double> returns(rewards.size());
  double next = bootstrap_value;
  for (std::size_t t = rewards.size(); t-- > 0;) {
    if (dones[t]) next = 0.0;
    next = rewards[t] + gamma * next;
    returns[t] = next;
  }
  return returns;
}

/// Per-sample clipped surrogate objective min(ρA, clip(ρ, 1-ε, 1+ε)A).
inline double clipped_objective(double ratio, double advantage, double epsilon) {
  return std::min(ratio * advantage, std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon) * advantage);
}

struct Transition {
  SystemState state;
  ValveAction action;
  double log_prob = 0.0;
  double reward = 0.0;
  double value = 0.0;
  bool done = false;
};

class RolloutBuffer {
 public:
  explicit RolloutBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("RolloutBuffer capacity must be > 0");
    records_.reserve(capacity);
  }

  void push(const Transition& t) {
    if (full()) throw std::logic_error("RolloutBuffer overflow");
    records_.push_back(t);
  }
  bool full() const { return records_.size() == capacity_; }
  bool empty() const { return records_.empty(); }
  std::size_t size() const { return records_.size(); }
  std::size_t capacity() const { return capacity_; }
  void clear() { records_.clear(); }
  const std::vector<Transition>& records() const { return records_; }

 private:
  std::size_t capacity_;
  std::vector<Transition> records_;
};

struct PpoBatch {
  std::vector<SystemState> states;
  std::vector<ValveAction> actions;
  std::vector<double> old_log_probs;
  std::vector<double> returns;
  std::vector<double> old_values;

  std::size_t size() const { return states.size(); }
};

struct ActorCriticGrads {
  nn::Vector trunk;
  nn::Vector policy;
  nn::Vector value;

  double norm() const {
    return std::sqrt(trunk.squaredNorm() + policy.squaredNorm() + value.squaredNorm());
  }
  void scale(double s) {
    trunk *= s;
    policy *= s;
    value *= s;
  }
};

struct PpoLoss {
  double total = 0.0;
  double policy = 0.0;   // -mean clipped objective
  double value = 0.0;    // value_coef * mean (V - R)^2
  double entropy = 0.0;  // mean Bernoulli entropy (bonus, subtracted)
  double clip_fraction = 0.0;
  ActorCriticGrads grads;
};

/// Clipped PPO loss with advantage A = R - V_old, and its exact gradient.
inline PpoLoss ppo_loss(const ActorCriticParams& params, const PpoBatch& batch, const PpoConfig& config) {
  const std::size_t n = batch.size();
  if (n == 0 || batch.actions.size() != n || batch.old_log_probs.size() != n ||
      batch.returns.size() != n || batch.old_values.size() != n) {
    throw std::invalid_argument("ppo_loss: inconsistent batch");
  }
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<double> adv(n);
  for (std::size_t b = 0; b < n; ++b) adv[b] = batch.returns[b] - batch.old_values[b];
  if (config.normalize_advantages) {
    double mean = 0.0;
    for (double a : adv) mean += a;
    mean *= inv_n;
    double var = 0.0;
    for (double a : adv) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var * inv_n);
    for (double& a : adv) a = (a - mean) / (sd + 1e-8);
  }

  const nn::ForwardCache trunk = nn::forward(params.trunk, state_batch(batch.states));
  const nn::ForwardCache policy = nn::forward(params.policy, trunk.output);
  const nn::ForwardCache value = nn::forward(params.value, trunk.output);

  PpoLoss loss;
  nn::Matrix d_logits = nn::Matrix::Zero(policy.output.rows(), policy.output.cols());
  nn::Matrix d_value(1, static_cast<Eigen::Index>(n));
  std::size_t clipped = 0;
  const double eps = config.clip_epsilon;

  for (std::size_t b = 0; b < n; ++b) {
    const auto col = static_cast<Eigen::Index>(b);
    double log_prob = 0.0;
    double entropy = 0.0;
    for (std::size_t i = 0; i < kTanks; ++i) {
      const double z = policy.output(static_cast<Eigen::Index>(i), col);
      log_prob += batch.actions[b].open[i] ? -softplus(-z) : -softplus(z);
      entropy += softplus(z) - logistic(z) * z;
    }
    const double ratio = std::exp(log_prob - batch.old_log_probs[b]);
    const double unclipped = ratio * adv[b];
    const double clipped_term = std::clamp(ratio, 1.0 - eps, 1.0 + eps) * adv[b];
    const bool use_unclipped = unclipped <= clipped_term;
    if (!use_unclipped) ++clipped;
    loss.policy -= std::min(unclipped, clipped_term) * inv_n;
    loss.entropy += entropy * inv_n;

    // d(loss)/d(log_prob) for this sample.
    const double d_lp = use_unclipped ? -unclipped * inv_n : 0.0;
    for (std::size_t i = 0; i < kTanks; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      const double z = policy.output(row, col);
      const double p = logistic(z);
      const double u = batch.actions[b].open[i] ? 1.0 : 0.0;
      d_logits(row, col) = d_lp * (u - p) + config.entropy_coef * inv_n * z * p * (1.0 - p);
    }

    const double v_err = value.output(0, col) - batch.returns[b];
    loss.value += config.value_coef * v_err * v_err * inv_n;
    d_value(0, col) = config.value_coef * 2.0 * v_err * inv_n;
  }
  loss.total = loss.policy + loss.value - config.entropy_coef * loss.entropy;
  loss.clip_fraction = static_cast<double>(clipped) * inv_n;

  nn::Matrix d_hidden_policy;
  nn::Matrix d_hidden_value;
  loss.grads.policy = nn::backward(params.policy, policy, d_logits, &d_hidden_policy);
  loss.grads.value = nn::backward(params.value, value, d_value, &d_hidden_value);
  loss.grads.trunk = nn::backward(params.trunk, trunk, d_hidden_policy + d_hidden_value);
  return loss;
}

/// Policy parameters together with their optimizer state.
struct PpoAgent {
  ActorCriticParams params;
  nn::AdamState trunk_opt;
  nn::AdamState policy_opt;
  nn::AdamState value_opt;
  PpoConfig config;

  static PpoAgent create(std::uint64_t seed, PpoConfig config = {}, ActorCriticShape shape = {}) {
    config.validate();
    PpoAgent a{init_actor_critic(seed, shape), {}, {}, {}, config};
    a.trunk_opt = nn::AdamState(a.params.trunk.size());
    a.policy_opt = nn::AdamState(a.params.policy.size());
    a.value_opt = nn::AdamState(a.params.value.size());
    return a;
  }
};

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
};

/// Several epochs of shuffled minibatch Adam steps on the buffered
/// experience; clears the buffer. `bootstrap_value` is V(x) of the state
/// following the last record, used when that record is not terminal.
inline UpdateStats ppo_update(PpoAgent& agent, RolloutBuffer& buffer, double bootstrap_value, Rng& rng) {
  if (!buffer.full()) throw std::logic_error("ppo_update requires a full rollout buffer");
  const PpoConfig& cfg = agent.config;
  const auto& records = buffer.records();
  const std::size_t n = records.size();

  std::vector<double> rewards(n);
  std::vector<bool> dones(n);
  for (std::size_t t = 0; t < n; ++t) {
    rewards[t] = records[t].reward;
    dones[t] = records[t].done;
  }
  const std::vector<double> returns = compute_returns(rewards, dones, cfg.gamma, bootstrap_value);

  UpdateStats stats;
  std::size_t steps = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs_per_update; ++epoch) {
    const nn::IndexList order = nn::shuffled_indices(n, rng);
    for (std::size_t m = 0; m < cfg.minibatch_count; ++m) {
      const std::size_t begin = m * n / cfg.minibatch_count;
      const std::size_t end = (m + 1) * n / cfg.minibatch_count;
      PpoBatch batch;
      for (std::size_t i = begin; i < end; ++i) {
        const Transition& r = records[order[i]];
        batch.states.push_back(r.state);
        batch.actions.push_back(r.action);
        batch.old_log_probs.push_back(r.log_prob);
        batch.returns.push_back(returns[order[i]]);
        batch.old_values.push_back(r.value);
      }
      PpoLoss loss = ppo_loss(agent.params, batch, cfg);
      if (cfg.max_grad_norm > 0.0) {
        const double norm = loss.grads.norm();
        if (norm > cfg.max_grad_norm) loss.grads.scale(cfg.max_grad_norm / norm);
      }
      nn::adam_step(agent.params.trunk, loss.grads.trunk, agent.trunk_opt, cfg.learning_rate);
      nn::adam_step(agent.params.policy, loss.grads.policy, agent.policy_opt, cfg.learning_rate);
      nn::adam_step(agent.params.value, loss.grads.value, agent.value_opt, cfg.learning_rate);
      stats.policy_loss += loss.policy;
      stats.value_loss += loss.value;
      stats.entropy += loss.entropy;
      stats.clip_fraction += loss.clip_fraction;
      ++steps;
    }
  }
  const double inv = 1.0 / static_cast<double>(steps);
  stats.policy_loss *= inv;
  stats.value_loss *= inv;
  stats.entropy *= inv;
  stats.clip_fraction *= inv;
  buffer.clear();
  return stats;
}

// ---------------------------------------------------------------------------
// Checkpoints

inline nlohmann::json to_json(const PpoConfig& c) {
  return {{"learning_rate", c.learning_rate},   {"t_update", c.t_update},
          {"clip_epsilon", c.clip_epsilon},     {"gamma", c.gamma},
          {"epochs_per_update", c.epochs_per_update}, {"minibatch_count", c.minibatch_count},
          {"value_coef", c.value_coef},         {"entropy_coef", c.entropy_coef},
          {"max_grad_norm", c.max_grad_norm},   {"normalize_advantages", c.normalize_advantages}};
}

inline PpoConfig ppo_config_from_json(const nlohmann::json& j) {
  PpoConfig c;
  c.learning_rate = j.at("learning_rate").get<double>();
  c.t_update = j.at("t_update").get<std::size_t>();
  c.clip_epsilon = j.at("clip_epsilon").get<double>();
  c.gamma = j.at("gamma").get<double>();
  c.epochs_per_update = j.at("epochs_per_update").get<std::size_t>();
  c.minibatch_count = j.at("minibatch_count").get<std::size_t>();
  c.value_coef = j.at("value_coef").get<double>();
  c.entropy_coef = j.at("entropy_coef").get<double>();
  c.max_grad_norm = j.value("max_grad_norm", 0.5);
  c.normalize_advantages = j.value("normalize_advantages", true);
  c.validate();
  return c;
}

inline nlohmann::json checkpoint_json(const PpoAgent& agent) {
  return {{"config", to_json(agent.config)},
          {"trunk", nn::to_json(agent.params.trunk)},
          {"policy", nn::to_json(agent.params.policy)},
          {"value", nn::to_json(agent.params.value)}};
}

/// Restores parameters and config; optimizer moments start fresh.
inline PpoAgent agent_from_checkpoint(const nlohmann::json& j) {
  PpoAgent a;
  a.config = ppo_config_from_json(j.at("config"));
  a.params = {nn::mlp_from_json(j.at("trunk")), nn::mlp_from_json(j.at("policy")),
              nn::mlp_from_json(j.at("value"))};
  a.trunk_opt = nn::AdamState(a.params.trunk.size());
  a.policy_opt = nn::AdamState(a.params.policy.size());
  a.value_opt = nn::AdamState(a.params.value.size());
  return a;
}

}  // namespace ftc
