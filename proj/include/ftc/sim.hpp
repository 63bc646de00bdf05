#pragma once

// Six-tank aircraft fuel network: pump allocation, conduit flows between
// open tanks, explicit Euler stepping and linear parameter degradation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace ftc {

inline constexpr std::size_t kTanks = 6;
inline constexpr std::size_t kEngines = 4;

// Tanks are numbered left to right; tanks 0..2 feed the left engines
// (E1, E2) and tanks 3..5 the right engines (E3, E4).
inline constexpr std::size_t kLeftMedianTank = 2;
inline constexpr std::size_t kRightMedianTank = 3;

using TankVector = std::array<double, kTanks>;
using EngineVector = std::array<double, kEngines>;

// Absolute tolerance on potential used to decide which open tanks act as
// conduit sources.
inline constexpr double kSourceTolerance = 1e-9;

template <class T, std::size_t N>
constexpr std::array<T, N> filled(T value) {
  std::array<T, N> out{};
  out.fill(value);
  return out;
}

/// Physical constants of the network. Defaults are the nominal system.
struct SystemParams {
  double gravity = 10.0;
  TankVector tank_heights = filled<double, kTanks>(1.0);
  TankVector tank_cross_sections = filled<double, kTanks>(1.0);
  TankVector valve_resistances = filled<double, kTanks>(100.0);
  TankVector pump_capacities = filled<double, kTanks>(0.1);
  EngineVector engine_demands = filled<double, kEngines>(0.025);
  double dt = 1.0;

  double left_demand() const { return engine_demands[0] + engine_demands[1]; }
  double right_demand() const { return engine_demands[2] + engine_demands[3]; }
  double total_demand() const { return left_demand() + right_demand(); }

  void validate() const {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(gravity)) throw std::invalid_argument("gravity must be > 0");
    if (!positive(dt)) throw std::invalid_argument("dt must be > 0");
    for (std::size_t i = 0; i < kTanks; ++i) {
      if (!positive(tank_heights[i]) || !positive(tank_cross_sections[i]) ||
          !positive(valve_resistances[i])) {
        throw std::invalid_argument("tank " + std::to_string(i + 1) +
                                    ": height, cross section and valve resistance must be > 0");
      }
      if (!std::isfinite(pump_capacities[i]) || pump_capacities[i] < 0.0) {
        throw std::invalid_argument("tank " + std::to_string(i + 1) + ": pump capacity must be >= 0");
      }
    }
    for (double e : engine_demands) {
      if (!positive(e)) throw std::invalid_argument("engine demands must be > 0");
    }
  }

  friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

struct SystemState {
  TankVector levels{};

  static SystemState full(const SystemParams& params) { return SystemState{params.tank_heights}; }

  /// Fuel volume per tank, x ⊙ c.
  TankVector volumes(const SystemParams& params) const {
    TankVector w{};
    for (std::size_t i = 0; i < kTanks; ++i) w[i] = levels[i] * params.tank_cross_sections[i];
    return w;
  }

  double total_fuel(const SystemParams& params) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < kTanks; ++i) sum += levels[i] * params.tank_cross_sections[i];
    return sum;
  }

  friend bool operator==(const SystemState&, const SystemState&) = default;
};

struct ValveAction {
  std::array<bool, kTanks> open{};

  static ValveAction all_closed() { return {}; }
  static ValveAction all_open() {
    ValveAction u;
    u.open.fill(true);
    return u;
  }
  /// Bit i of `mask` opens tank i+1.
  static ValveAction from_mask(unsigned mask) {
    ValveAction u;
    for (std::size_t i = 0; i < kTanks; ++i) u.open[i] = ((mask >> i) & 1U) != 0;
    return u;
  }

  std::size_t open_count() const {
    return static_cast<std::size_t>(std::count(open.begin(), open.end(), true));
  }
  double mean() const { return static_cast<double>(open_count()) / static_cast<double>(kTanks); }

  friend bool operator==(const ValveAction&, const ValveAction&) = default;
};

struct StateDerivative {
  TankVector d_levels{};
  TankVector pump_outflow{};
  // + into the tank, - out of it.
  TankVector valve_flux{};
  double conduit_potential = 0.0;
};

struct ValveFlows {
  TankVector flux{};
  double conduit_potential = 0.0;
};

/// Per-component degradation factors: the number of intervals over which
/// the parameter changes by 100% of its nominal value.
struct DegradationProfile {
  std::array<std::optional<double>, kEngines> engine_demand_factors{};
  std::array<std::optional<double>, kTanks> valve_resistance_factors{};
  std::array<std::optional<double>, kTanks> pump_capacity_factors{};

  void validate() const {
    auto check = [](const auto& factors, const char* what) {
      for (const auto& f : factors) {
        if (f && !(std::isfinite(*f) && *f > 0.0)) {
          throw std::invalid_argument(std::string(what) + " degradation factor must be > 0");
        }
      }
    };
    check(engine_demand_factors, "engine demand");
    check(valve_resistance_factors, "valve resistance");
    check(pump_capacity_factors, "pump capacity");
  }

  bool empty() const {
    auto none = [](const auto& fs) {
      return std::none_of(fs.begin(), fs.end(), [](const auto& f) { return f.has_value(); });
    };
    return none(engine_demand_factors) && none(valve_resistance_factors) &&
           none(pump_capacity_factors);
  }

  friend bool operator==(const DegradationProfile&, const DegradationProfile&) = default;
};

/// Engine supply drawn from each tank. Each side starts at its median tank
/// and moves outward while demand remains; a tank supplies at most its pump
/// capacity and the volume it holds for one step.
inline TankVector pump_flows(const SystemParams& params, const SystemState& state) {
  TankVector outflow{};
  auto drain_side = [&](double demand, std::ptrdiff_t tank, std::ptrdiff_t direction) {
    for (; demand > 0.0 && tank >= 0 && tank < static_cast<std::ptrdiff_t>(kTanks);
         tank += direction) {
      const auto i = static_cast<std::size_t>(tank);
      const double available =
          std::max(0.0, state.levels[i] * params.tank_cross_sections[i] / params.dt);
      const double supply = std::min({available, params.pump_capacities[i], demand});
      outflow[i] = supply;
      demand -= supply;
    }
  };
  drain_side(params.left_demand(), kLeftMedianTank, -1);
  drain_side(params.right_demand(), kRightMedianTank, +1);
  return outflow;
}

/// Conduit exchange between open tanks. The highest open tank sets the
/// conduit potential; lower open tanks fill through their valve resistance
/// and the total is drawn from the source tanks in proportion to 1/r.
inline ValveFlows valve_flows(const SystemParams& params, const SystemState& state,
                              const ValveAction& action) {
  ValveFlows out;
  if (action.open_count() < 2) return out;

  double v_ref = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < kTanks; ++i) {
    if (action.open[i]) v_ref = std::max(v_ref, params.gravity * state.levels[i]);
  }
  out.conduit_potential = v_ref;

  std::array<bool, kTanks> source{};
  double total = 0.0;
  double source_conductance = 0.0;
  for (std::size_t i = 0; i < kTanks; ++i) {
    if (!action.open[i]) continue;
    const double potential = params.gravity * state.levels[i];
    if (potential < v_ref - kSourceTolerance) {
      out.flux[i] = (v_ref - potential) / params.valve_resistances[i];
      total += out.flux[i];
    } else {
      source[i] = true;
      source_conductance += 1.0 / params.valve_resistances[i];
    }
  }
  for (std::size_t i = 0; i < kTanks; ++i) {
    if (source[i]) out.flux[i] = -total * (1.0 / params.valve_resistances[i]) / source_conductance;
  }
  return out;
}

inline StateDerivative derivative(const SystemParams& params, const SystemState& state,
                                  const ValveAction& action) {
  StateDerivative d;
  d.pump_outflow = pump_flows(params, state);
  const ValveFlows valves = valve_flows(params, state, action);
  d.valve_flux = valves.flux;
  d.conduit_potential = valves.conduit_potential;
  for (std::size_t i = 0; i < kTanks; ++i) {
    d.d_levels[i] = (-d.pump_outflow[i] + d.valve_flux[i]) / params.tank_cross_sections[i];
  }
  return d;
}

/// Explicit Euler step; levels are clamped to [0, h].
inline SystemState integrate_step(const SystemParams& params, const SystemState& state,
                                  const ValveAction& action) {
  const StateDerivative d = derivative(params, state, action);
  SystemState next;
  for (std::size_t i = 0; i < kTanks; ++i) {
    next.levels[i] =
        std::clamp(state.levels[i] + params.dt * d.d_levels[i], 0.0, params.tank_heights[i]);
  }
  return next;
}

/// Parameters after `interval` degradation steps. Demands and resistances
/// grow as (1 + k/D); pump capacities shrink as max(0, 1 - k/D).
inline SystemParams apply_degradation(const SystemParams& nominal,
                                      const DegradationProfile& profile,
                                      std::size_t interval) {
  profile.validate();
  SystemParams out = nominal;
  const double k = static_cast<double>(interval);
  for (std::size_t i = 0; i < kEngines; ++i) {
    if (const auto& f = profile.engine_demand_factors[i]) {
      out.engine_demands[i] = nominal.engine_demands[i] * (1.0 + k / *f);
    }
  }
  for (std::size_t i = 0; i < kTanks; ++i) {
    if (const auto& f = profile.valve_resistance_factors[i]) {
      out.valve_resistances[i] = nominal.valve_resistances[i] * (1.0 + k / *f);
    }
    if (const auto& f = profile.pump_capacity_factors[i]) {
      out.pump_capacities[i] = std::max(0.0, nominal.pump_capacities[i] * (1.0 - k / *f));
    }
  }
  return out;
}

// Left-right reflection helpers.

template <class T, std::size_t N>
std::array<T, N> mirrored(std::array<T, N> v) {
  std::reverse(v.begin(), v.end());
  return v;
}

inline SystemParams mirrored(const SystemParams& p) {
  SystemParams m = p;
  m.tank_heights = mirrored(p.tank_heights);
  m.tank_cross_sections = mirrored(p.tank_cross_sections);
  m.valve_resistances = mirrored(p.valve_resistances);
  m.pump_capacities = mirrored(p.pump_capacities);
  m.engine_demands = mirrored(p.engine_demands);
  return m;
}

inline SystemState mirrored(const SystemState& s) { return SystemState{mirrored(s.levels)}; }
inline ValveAction mirrored(const ValveAction& u) { return ValveAction{mirrored(u.open)}; }

}  // namespace ftc
