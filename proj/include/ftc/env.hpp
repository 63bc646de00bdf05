#pragma once

// Episodic control environment over the fuel network: reset at capacity,
// centre-of-gravity/variance/valve reward and fuel-depletion termination.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>

#include "ftc/sim.hpp"

namespace ftc {

inline constexpr TankVector kDefaultMomentArms{-3.0, -2.0, -1.0, 1.0, 2.0, 3.0};

struct EnvConfig {
  SystemParams nominal_params{};
  DegradationProfile profile{};
  TankVector moment_arms = kDefaultMomentArms;
  double gamma = 0.99;

  void validate() const {
    nominal_params.validate();
    profile.validate();
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
  }
};

struct RewardBreakdown {
  double r_cg = 0.0;
  double r_var = 0.0;
  double r_u = 0.0;
  double total = 0.0;

  friend bool operator==(const RewardBreakdown&, const RewardBreakdown&) = default;
};

struct StepResult {
  SystemState next_state;
  RewardBreakdown reward;
  bool done = false;
  // Set when an episode is cut by a step cap rather than by depletion.
  bool truncated = false;

  friend bool operator==(const StepResult&, const StepResult&) = default;
};

/// r = (1 - |r_cg| / max m) * r_var - r_u, with r_cg the fuel-weighted mean
/// moment arm and r_var the fuel-weighted variance of arms about r_cg.
inline RewardBreakdown reward(const SystemState& state, const ValveAction& action,
                              const SystemParams& params, const TankVector& moment_arms) {
  RewardBreakdown r;
  const TankVector w = state.volumes(params);
  double mass = 0.0;
  for (double v : w) mass += v;
  if (mass > 0.0) {
    // Normalise first so a single occupied tank gives an exact arm and zero spread.
    for (std::size_t i = 0; i < kTanks; ++i) r.r_cg += (w[i] / mass) * moment_arms[i];
    for (std::size_t i = 0; i < kTanks; ++i) {
      const double d = moment_arms[i] - r.r_cg;
      r.r_var += (w[i] / mass) * d * d;
    }
  }
  r.r_u = action.mean();
  const double max_arm = *std::max_element(moment_arms.begin(), moment_arms.end());
  r.total = (1.0 - std::abs(r.r_cg) / max_arm) * r.r_var - r.r_u;
  return r;
}

// Volume slack on the depletion test so that Euler round-off in the drained
// levels does not end an episode one step early.
inline constexpr double kDepletionTolerance = 1e-9;

/// Episode ends once the tanks cannot cover one more step of total demand.
inline bool is_terminal(const SystemState& state, const SystemParams& params) {
  return state.total_fuel(params) < params.total_demand() * params.dt - kDepletionTolerance;
}

/// One transition of the true system under the parameters of interval `k`.
/// The reward is evaluated on the pre-step state and the applied action.
inline StepResult step(const SystemState& state, const ValveAction& action,
                       const EnvConfig& config, std::size_t interval) {
  const SystemParams active = apply_degradation(config.nominal_params, config.profile, interval);
  if (is_terminal(state, active)) throw std::logic_error("step called on a terminal state");
  StepResult out;
  out.reward = reward(state, action, active, config.moment_arms);
  out.next_state = integrate_step(active, state, action);
  out.done = is_terminal(out.next_state, active);
  return out;
}

/// Steps from full tanks to termination with every valve closed.
inline std::size_t closed_valve_episode_length(const SystemParams& params) {
  SystemState x = SystemState::full(params);
  std::size_t steps = 0;
  const std::size_t limit = 1'000'000;
  while (!is_terminal(x, params)) {
    x = integrate_step(params, x, ValveAction::all_closed());
    if (++steps >= limit) throw std::runtime_error("closed-valve episode does not terminate");
  }
  return steps;
}

/// Anything with the reset/step contract of the fuel environment.
template <class E>
concept Environment = requires(E env, const ValveAction& u, std::size_t k) {
  { env.reset(k) } -> std::same_as<SystemState>;
  { env.step(u) } -> std::same_as<StepResult>;
  { env.state() } -> std::convertible_to<const SystemState&>;
  { env.done() } -> std::convertible_to<bool>;
};

/// The true (simulated) system.
class FuelTankEnv {
 public:
  explicit FuelTankEnv(EnvConfig config) : config_(std::move(config)) {
    config_.validate();
    active_ = config_.nominal_params;
    state_ = SystemState::full(active_);
  }

  SystemState reset(std::size_t interval) {
    interval_ = interval;
    active_ = apply_degradation(config_.nominal_params, config_.profile, interval);
    state_ = SystemState::full(active_);
    done_ = is_terminal(state_, active_);
    return state_;
  }

  StepResult step(const ValveAction& action) {
    if (done_) throw std::logic_error("FuelTankEnv::step after episode end; call reset()");
    StepResult out;
    out.reward = reward(state_, action, active_, config_.moment_arms);
    out.next_state = integrate_step(active_, state_, action);
    out.done = is_terminal(out.next_state, active_);
    state_ = out.next_state;
    done_ = out.done;
    return out;
  }

  const SystemState& state() const { return state_; }
  bool done() const { return done_; }
  std::size_t interval() const { return interval_; }
  const SystemParams& active_params() const { return active_; }
  const EnvConfig& config() const { return config_; }

 private:
  EnvConfig config_;
  SystemParams active_;
  SystemState state_;
  std::size_t interval_ = 0;
  bool done_ = false;
};

static_assert(Environment<FuelTankEnv>);

}  // namespace ftc
