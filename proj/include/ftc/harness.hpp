#pragma once

// Mixed online/offline control loop, constant-valve baselines and the
// single-fault, multi-fault and randomized aggregate trial protocols.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ftc/agent.hpp"
#include "ftc/env.hpp"
#include "ftc/errors.hpp"
#include "ftc/random.hpp"
#include "ftc/sim.hpp"
#include "ftc/surrogate.hpp"

namespace ftc {

enum class ControlMode { rl_online_offline, rl_online_only, all_valves_open, all_valves_closed };

inline constexpr std::array<ControlMode, 4> kAllModes{
    ControlMode::rl_online_offline, ControlMode::rl_online_only, ControlMode::all_valves_open,
    ControlMode::all_valves_closed};

inline std::string_view mode_name(ControlMode m) {
  switch (m) {
    case ControlMode::rl_online_offline: return "rl-online-offline";
    case ControlMode::rl_online_only: return "rl-online-only";
    case ControlMode::all_valves_open: return "open";
    case ControlMode::all_valves_closed: return "closed";
  }
  return "?";
}

inline ControlMode parse_mode(std::string_view name) {
  for (ControlMode m : kAllModes) {
    if (mode_name(m) == name) return m;
  }
  throw ConfigError("unknown mode '" + std::string(name) + "'");
}

inline bool is_learning(ControlMode m) {
  return m == ControlMode::rl_online_offline || m == ControlMode::rl_online_only;
}

struct TrialConfig {
  ControlMode mode = ControlMode::rl_online_offline;
  EnvConfig env{};
  std::size_t intervals = 10;
  std::size_t t_online = 512;
  std::size_t t_offline = 2048;
  PpoConfig ppo{};  // ppo.t_update is the policy update period
  std::uint64_t seed = 0;
  std::size_t pretrain_episodes = 50;
  SurrogateOptions surrogate{};

  std::size_t t_update() const { return ppo.t_update; }

  void validate() const {
    try {
      env.validate();
      ppo.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (intervals == 0 || t_online == 0) throw ConfigError("intervals and t_online must be positive");
    if (t_online % ppo.t_update != 0 || t_offline % ppo.t_update != 0) {
      throw ConfigError("t_update must divide t_online and t_offline");
    }
    if (mode == ControlMode::rl_online_offline && t_offline == 0) {
      throw ConfigError("t_offline must be positive in rl-online-offline mode");
    }
    if (mode == ControlMode::rl_online_offline && t_online < surrogate.min_rows) {
      throw ConfigError("t_online is too short to refit the system model");
    }
  }
};

struct IntervalMetrics {
  std::size_t interval = 0;
  double mean_reward = 0.0;
  double mean_r_cg = 0.0;
  double mean_r_var = 0.0;
  double mean_r_u = 0.0;
  std::size_t episodes = 0;
  std::optional<double> surrogate_r2;

  friend bool operator==(const IntervalMetrics&, const IntervalMetrics&) = default;
};

struct StepRecord {
  std::size_t t = 0;
  std::size_t interval = 0;
  std::size_t episode = 0;
  SystemState state;  // before the action
  ValveAction action;
  RewardBreakdown reward;
  bool done = false;
};

struct LoopCounters {
  std::size_t online_steps = 0;
  std::size_t offline_steps = 0;
  std::size_t policy_updates = 0;
  std::size_t surrogate_fits = 0;
};

struct TrialResult {
  TrialConfig config;
  std::vector<IntervalMetrics> intervals;
  std::vector<StepRecord> steps;
  LoopCounters counters;
  // Active parameters at the start of each interval.
  std::vector<SystemParams> interval_params;
};

/// Fits the initial system model on random-action episodes of the
/// fault-free system.
inline SurrogateModel pretrain_surrogate(const TrialConfig& config) {
  EnvConfig nominal = config.env;
  nominal.profile = {};
  const TransitionDataset ds = generate_dataset(nominal, config.pretrain_episodes, derive_seed(config.seed, 500));
  return fit_surrogate(ds, nullptr, derive_seed(config.seed, 501), config.surrogate,
                       nominal.nominal_params.tank_heights, 0);
}

namespace detail {

struct MetricsAccumulator {
  double reward = 0.0, r_cg = 0.0, r_var = 0.0, r_u = 0.0;
  std::size_t steps = 0;

  void add(const RewardBreakdown& r) {
    reward += r.total;
    r_cg += r.r_cg;
    r_var += r.r_var;
    r_u += r.r_u;
    ++steps;
  }
  IntervalMetrics finish(std::size_t interval, std::size_t episodes) const {
    const double n = static_cast<double>(steps);
    return {interval, reward / n, r_cg / n, r_var / n, r_u / n, episodes, std::nullopt};
  }
};

// Runs `steps` policy-driven steps on `env`, resetting episodes as they end
// and updating the policy whenever the buffer fills.
template <Environment Env, class OnStep>
void run_learning_phase(Env& env, std::size_t interval, std::size_t steps, PpoAgent& agent,
                        Rng& action_rng, Rng& update_rng, LoopCounters& counters, OnStep&& on_step) {
  RolloutBuffer buffer(agent.config.t_update);
  for (std::size_t t = 0; t < steps; ++t) {
    bool fresh = false;
    if (env.done()) {
      env.reset(interval);
      fresh = true;
    }
    const SystemState x = env.state();
    const PolicyOutput po = policy_forward(agent.params, x);
    const SampledAction s = sample_action(po.probabilities, action_rng);
    const StepResult r = env.step(s.action);
    on_step(x, s.action, r, fresh);
    buffer.push({x, s.action, s.log_prob, r.reward.total, po.value, r.done});
    if (buffer.full()) {
      const double bootstrap = r.done ? 0.0 : value_estimate(agent.params, env.state());
      ppo_update(agent, buffer, bootstrap, update_rng);
      ++counters.policy_updates;
    }
  }
}

}  // namespace detail

/// One trial of the control loop. Each interval degrades the system, runs
/// t_online steps on it and, in rl-online-offline mode, refits the system
/// model on that interval's experience and trains for t_offline steps on
/// the model. `pretrained` seeds the system model; when absent it is fitted
/// here from fault-free random-action data.
inline TrialResult run_control_loop(const TrialConfig& config, const SurrogateModel* pretrained = nullptr) {
  config.validate();
  TrialResult result;
  result.config = config;
  result.steps.reserve(config.intervals * config.t_online);

  const bool learning = is_learning(config.mode);
  const bool offline = config.mode == ControlMode::rl_online_offline;
  Rng action_rng = make_rng(config.seed, 1);
  Rng update_rng = make_rng(config.seed, 2);
  std::optional<PpoAgent> agent;
  if (learning) agent = PpoAgent::create(derive_seed(config.seed, 3), config.ppo);
  std::optional<SurrogateModel> model;
  if (offline) model = pretrained != nullptr ? *pretrained : pretrain_surrogate(config);
  const ValveAction constant =
      config.mode == ControlMode::all_valves_open ? ValveAction::all_open() : ValveAction::all_closed();

  FuelTankEnv env(config.env);
  TransitionRecorder cache;
  std::size_t t_global = 0;
  std::size_t episode = 0;

  for (std::size_t k = 0; k < config.intervals; ++k) {
    // Episodes never span intervals: each interval starts full under the
    // newly degraded parameters.
    env.reset(k);
    result.interval_params.push_back(env.active_params());
    detail::MetricsAccumulator acc;
    std::size_t episodes = 1;
    ++episode;
    cache.clear();

    auto log_step = [&](const SystemState& x, const ValveAction& u, const StepResult& r, bool fresh) {
      if (fresh) {
        ++episodes;
        ++episode;
      }
      result.steps.push_back({t_global++, k, episode - 1, x, u, r.reward, r.done});
      acc.add(r.reward);
      ++result.counters.online_steps;
      if (offline) cache.add(x, u, r.next_state);
    };

    if (learning) {
      detail::run_learning_phase(env, k, config.t_online, *agent, action_rng, update_rng, result.counters, log_step);
    } else {
      for (std::size_t t = 0; t < config.t_online; ++t) {
        bool fresh = false;
        if (env.done()) {
          env.reset(k);
          fresh = true;
        }
        const SystemState x = env.state();
        log_step(x, constant, env.step(constant), fresh);
      }
    }
    IntervalMetrics metrics = acc.finish(k, episodes);

    if (offline) {
      model = fit_surrogate(cache.dataset(), &*model, derive_seed(config.seed, 1000 + k), config.surrogate,
                            config.env.nominal_params.tank_heights, k);
      ++result.counters.surrogate_fits;
      metrics.surrogate_r2 = model->r2;
      cache.clear();
      auto sim = offline_env(*model, config.env, k);
      detail::run_learning_phase(sim, k, config.t_offline, *agent, action_rng, update_rng, result.counters,
                                 [&](const SystemState&, const ValveAction&, const StepResult&, bool) {
                                   ++result.counters.offline_steps;
                                 });
    }
    result.intervals.push_back(metrics);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Experiment protocols

/// Left-most engine demand doubles over 20 intervals.
inline DegradationProfile single_fault_profile() {
  DegradationProfile p;
  p.engine_demand_factors[0] = 20.0;
  return p;
}

/// Single fault plus valve resistance of tanks 5 and 6 doubling over 20 intervals.
inline DegradationProfile multi_fault_profile() {
  DegradationProfile p = single_fault_profile();
  p.valve_resistance_factors[4] = 20.0;
  p.valve_resistance_factors[5] = 20.0;
  return p;
}

inline std::vector<TrialResult> run_protocol(const DegradationProfile& profile, std::uint64_t seed,
                                             TrialConfig base = {},
                                             std::vector<ControlMode> modes = {kAllModes.begin(), kAllModes.end()}) {
  base.env.profile = profile;
  base.seed = seed;
  std::optional<SurrogateModel> pretrained;
  std::vector<TrialResult> out;
  for (ControlMode m : modes) {
    TrialConfig cfg = base;
    cfg.mode = m;
    if (m == ControlMode::rl_online_offline && !pretrained) pretrained = pretrain_surrogate(cfg);
    out.push_back(run_control_loop(cfg, pretrained ? &*pretrained : nullptr));
  }
  return out;
}

inline std::vector<TrialResult> run_single_fault(std::uint64_t seed, TrialConfig base = {}) {
  return run_protocol(single_fault_profile(), seed, std::move(base));
}

inline std::vector<TrialResult> run_multi_fault(std::uint64_t seed, TrialConfig base = {}) {
  return run_protocol(multi_fault_profile(), seed, std::move(base));
}

struct TrialFault {
  std::size_t valve = 0;  // tank index, 0-based
  double valve_factor = 0.0;
  std::size_t pump = 0;
  double pump_factor = 0.0;
};

struct AggregateResult {
  std::vector<ControlMode> modes;
  std::vector<TrialFault> faults;
  // per_trial[trial][mode] = interval metrics of that run
  std::vector<std::vector<std::vector<IntervalMetrics>>> per_trial;
  // mean_reward[interval][mode], averaged over trials
  std::vector<std::vector<double>> mean_reward;
};

inline constexpr double kAggregateFactorMin = 10.0;
inline constexpr double kAggregateFactorMax = 30.0;

/// Randomized trials: one valve (resistance) and one tank pump (capacity)
/// each degrade with a factor drawn uniformly from [10, 30].
inline AggregateResult run_aggregate(std::size_t trials, std::uint64_t seed, TrialConfig base = {},
                                     std::vector<ControlMode> modes = {kAllModes.begin(), kAllModes.end()}) {
  if (trials == 0) throw ConfigError("aggregate needs at least one trial");
  if (modes.empty()) throw ConfigError("aggregate needs at least one mode");
  base.seed = seed;
  base.validate();
  AggregateResult agg;
  agg.modes = modes;
  Rng rng = make_rng(seed, 0xa66);
  const double span = kAggregateFactorMax - kAggregateFactorMin;
  std::optional<SurrogateModel> pretrained;
  for (ControlMode m : modes) {
    if (m == ControlMode::rl_online_offline) pretrained = pretrain_surrogate(base);
  }

  for (std::size_t i = 0; i < trials; ++i) {
    TrialFault f;
    f.valve = static_cast<std::size_t>(uniform_int(rng, 0, kTanks - 1));
    f.valve_factor = kAggregateFactorMin + span * uniform01(rng);
    f.pump = static_cast<std::size_t>(uniform_int(rng, 0, kTanks - 1));
    f.pump_factor = kAggregateFactorMin + span * uniform01(rng);
    agg.faults.push_back(f);

    TrialConfig cfg = base;
    cfg.env.profile = {};
    cfg.env.profile.valve_resistance_factors[f.valve] = f.valve_factor;
    cfg.env.profile.pump_capacity_factors[f.pump] = f.pump_factor;
    cfg.seed = derive_seed(seed, 10 + i);
    std::vector<std::vector<IntervalMetrics>> runs;
    for (ControlMode m : modes) {
      cfg.mode = m;
      runs.push_back(run_control_loop(cfg, pretrained ? &*pretrained : nullptr).intervals);
    }
    agg.per_trial.push_back(std::move(runs));
  }

  agg.mean_reward.assign(base.intervals, std::vector<double>(modes.size(), 0.0));
  for (const auto& runs : agg.per_trial) {
    for (std::size_t m = 0; m < modes.size(); ++m) {
      for (std::size_t k = 0; k < base.intervals; ++k) {
        agg.mean_reward[k][m] += runs[m][k].mean_reward / static_cast<double>(trials);
      }
    }
  }
  return agg;
}

}  // namespace ftc
