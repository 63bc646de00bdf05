#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "ftc/random.hpp"
#include "ftc/sim.hpp"

using namespace ftc;

namespace {

SystemState levels(std::initializer_list<double> xs) {
  SystemState s;
  std::copy(xs.begin(), xs.end(), s.levels.begin());
  return s;
}

ValveAction valves(std::initializer_list<int> us) {
  ValveAction u;
  std::size_t i = 0;
  for (int v : us) u.open[i++] = v != 0;
  return u;
}

double sum(const TankVector& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

SystemState random_state(Rng& rng) {
  SystemState s;
  for (double& x : s.levels) x = uniform01(rng);
  return s;
}

SystemParams random_params(Rng& rng) {
  SystemParams p;
  p.gravity = 5.0 + 10.0 * uniform01(rng);
  for (std::size_t i = 0; i < kTanks; ++i) {
    p.tank_heights[i] = 0.5 + uniform01(rng);
    p.tank_cross_sections[i] = 0.5 + 2.0 * uniform01(rng);
    p.valve_resistances[i] = 20.0 + 200.0 * uniform01(rng);
    p.pump_capacities[i] = 0.02 + 0.2 * uniform01(rng);
  }
  for (double& e : p.engine_demands) e = 0.005 + 0.05 * uniform01(rng);
  p.dt = 0.25 + uniform01(rng);
  return p;
}

}  // namespace

TEST(PumpFlows, NominalFullTanksDrawFromMedianTanks) {
  const SystemParams p;
  const TankVector out = pump_flows(p, SystemState::full(p));
  const TankVector expected{0, 0, 0.05, 0.05, 0, 0};
  for (std::size_t i = 0; i < kTanks; ++i) EXPECT_DOUBLE_EQ(out[i], expected[i]) << i;
}

TEST(PumpFlows, ZeroDemandDrawsNothing) {
  SystemParams p;
  p.engine_demands = {0.0, 0.0, 0.0, 0.0};
  const TankVector out = pump_flows(p, SystemState::full(p));
  for (double f : out) EXPECT_EQ(f, 0.0);
}

TEST(PumpFlows, EmptyMedianTankFallsThroughOutward) {
  const SystemParams p;
  const TankVector out = pump_flows(p, levels({1, 1, 0, 1, 1, 1}));
  EXPECT_EQ(out[2], 0.0);
  EXPECT_DOUBLE_EQ(out[1], 0.05);
  EXPECT_EQ(out[0], 0.0);
  EXPECT_DOUBLE_EQ(out[3], 0.05);
}

TEST(PumpFlows, DemandSpreadsWhenPumpSaturates) {
  SystemParams p;
  p.engine_demands = {0.1, 0.08, 0.025, 0.025};  // left 0.18 > one pump
  const TankVector out = pump_flows(p, SystemState::full(p));
  EXPECT_DOUBLE_EQ(out[2], 0.1);
  EXPECT_NEAR(out[1], 0.08, 1e-15);
  EXPECT_EQ(out[0], 0.0);
}

TEST(PumpFlows, UnmetDemandIsDropped) {
  const SystemParams p;
  const TankVector out = pump_flows(p, levels({0, 0, 0.01, 1, 1, 1}));
  EXPECT_DOUBLE_EQ(out[2], 0.01);
  EXPECT_EQ(out[1], 0.0);
  EXPECT_EQ(out[0], 0.0);
}

TEST(PumpFlows, NeverExceedsCapacityOrVolume) {
  Rng rng = make_rng(3);
  for (int trial = 0; trial < 2000; ++trial) {
    const SystemParams p = random_params(rng);
    const SystemState s = random_state(rng);
    const TankVector out = pump_flows(p, s);
    const TankVector vol = s.volumes(p);
    for (std::size_t i = 0; i < kTanks; ++i) {
      EXPECT_GE(out[i], 0.0);
      EXPECT_LE(out[i], p.pump_capacities[i] + 1e-15);
      EXPECT_LE(out[i] * p.dt, vol[i] + 1e-15);
    }
    EXPECT_LE(out[0] + out[1] + out[2], p.left_demand() + 1e-15);
    EXPECT_LE(out[3] + out[4] + out[5], p.right_demand() + 1e-15);
  }
}

TEST(ValveFlows, SingleSourceSingleSink) {
  const SystemParams p;
  const ValveFlows f = valve_flows(p, levels({1.0, 0.5, 1, 1, 1, 1}), valves({1, 1, 0, 0, 0, 0}));
  EXPECT_DOUBLE_EQ(f.conduit_potential, 10.0);
  EXPECT_DOUBLE_EQ(f.flux[1], 0.05);
  EXPECT_DOUBLE_EQ(f.flux[0], -0.05);
  for (std::size_t i = 2; i < kTanks; ++i) EXPECT_EQ(f.flux[i], 0.0);
}

TEST(ValveFlows, EqualLevelsGiveNoFlow) {
  const SystemParams p;
  const ValveFlows f = valve_flows(p, SystemState::full(p), ValveAction::all_open());
  for (double v : f.flux) EXPECT_EQ(v, 0.0);
}

TEST(ValveFlows, TwoSourcesSplitEvenly) {
  const SystemParams p;
  const ValveFlows f = valve_flows(p, levels({1, 1, 0, 1, 1, 1}), valves({1, 1, 1, 0, 0, 0}));
  EXPECT_DOUBLE_EQ(f.flux[0], -0.05);
  EXPECT_DOUBLE_EQ(f.flux[1], -0.05);
  EXPECT_DOUBLE_EQ(f.flux[2], 0.1);
}

TEST(ValveFlows, SourceSplitFollowsInverseResistance) {
  SystemParams p;
  p.valve_resistances[0] = 50.0;  // twice the conductance of tank 2
  const ValveFlows f = valve_flows(p, levels({1, 1, 0, 1, 1, 1}), valves({1, 1, 1, 0, 0, 0}));
  EXPECT_NEAR(f.flux[0], -0.1 * 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(f.flux[1], -0.1 / 3.0, 1e-15);
}

TEST(ValveFlows, FewerThanTwoOpenValvesGiveNoFlow) {
  const SystemParams p;
  const SystemState s = levels({1, 0, 0.5, 0.2, 0.9, 0.1});
  for (int i = -1; i < static_cast<int>(kTanks); ++i) {
    ValveAction u;
    if (i >= 0) u.open[static_cast<std::size_t>(i)] = true;
    const ValveFlows f = valve_flows(p, s, u);
    EXPECT_EQ(f.conduit_potential, 0.0);
    for (double v : f.flux) EXPECT_EQ(v, 0.0);
  }
}

TEST(ValveFlows, ConservesFuelAndIsolatesClosedTanks) {
  Rng rng = make_rng(4);
  for (int trial = 0; trial < 20000; ++trial) {
    const SystemParams p = random_params(rng);
    const SystemState s = random_state(rng);
    const ValveAction u = ValveAction::from_mask(static_cast<unsigned>(uniform_int(rng, 0, 63)));
    const ValveFlows f = valve_flows(p, s, u);
    EXPECT_NEAR(sum(f.flux), 0.0, 1e-9);
    for (std::size_t i = 0; i < kTanks; ++i) {
      if (!u.open[i]) EXPECT_EQ(f.flux[i], 0.0);
    }
  }
}

TEST(Derivative, ClosedValvesZeroDemandIsStationary) {
  SystemParams p;
  p.engine_demands = {0.0, 0.0, 0.0, 0.0};
  const StateDerivative d = derivative(p, levels({1, 0.3, 0.2, 0.9, 0.5, 0}), ValveAction::all_closed());
  for (double v : d.d_levels) EXPECT_EQ(v, 0.0);
}

TEST(Derivative, NominalClosedValves) {
  const SystemParams p;
  const StateDerivative d = derivative(p, SystemState::full(p), ValveAction::all_closed());
  const TankVector expected{0, 0, -0.05, -0.05, 0, 0};
  for (std::size_t i = 0; i < kTanks; ++i) EXPECT_DOUBLE_EQ(d.d_levels[i], expected[i]);
}

TEST(Derivative, PumpAndValveContributionsSuperpose) {
  const SystemParams p;
  // Valves on tanks 5 and 6 only, pumps on tanks 3 and 4 only.
  const SystemState s = levels({1, 1, 1, 1, 1, 0.5});
  const ValveAction u = valves({0, 0, 0, 0, 1, 1});
  const StateDerivative d = derivative(p, s, u);
  const TankVector pumps = pump_flows(p, s);
  const ValveFlows flows = valve_flows(p, s, u);
  for (std::size_t i = 0; i < kTanks; ++i) EXPECT_DOUBLE_EQ(d.d_levels[i], -pumps[i] + flows.flux[i]);
  EXPECT_DOUBLE_EQ(d.d_levels[2], -0.05);
  EXPECT_DOUBLE_EQ(d.d_levels[4], -0.05);
  EXPECT_DOUBLE_EQ(d.d_levels[5], 0.05);
}

TEST(Derivative, DividesByCrossSection) {
  SystemParams p;
  p.tank_cross_sections[2] = 2.0;
  const StateDerivative d = derivative(p, SystemState::full(p), ValveAction::all_closed());
  EXPECT_DOUBLE_EQ(d.d_levels[2], -0.025);
}

TEST(IntegrateStep, NominalClosedValves) {
  const SystemParams p;
  const SystemState next = integrate_step(p, SystemState::full(p), ValveAction::all_closed());
  const TankVector expected{1, 1, 0.95, 0.95, 1, 1};
  for (std::size_t i = 0; i < kTanks; ++i) EXPECT_DOUBLE_EQ(next.levels[i], expected[i]);
}

TEST(IntegrateStep, StationaryStateUnchanged) {
  SystemParams p;
  p.engine_demands = {0.0, 0.0, 0.0, 0.0};
  const SystemState s = levels({0.7, 0.7, 0.7, 0.7, 0.7, 0.7});
  const SystemState next = integrate_step(p, s, ValveAction::all_open());
  for (std::size_t i = 0; i < kTanks; ++i) EXPECT_EQ(next.levels[i], 0.7);
}

TEST(IntegrateStep, ClampsAtZero) {
  SystemParams p;
  p.engine_demands = {0.0, 0.0, 0.0, 0.0};
  p.valve_resistances = filled<double, kTanks>(2.0);
  // Tank 1 is the only source and loses 0.05 per step while holding 0.01.
  const SystemState s = levels({0.01, 0, 0, 0, 0, 0});
  const ValveAction u = valves({1, 1, 0, 0, 0, 0});
  EXPECT_DOUBLE_EQ(derivative(p, s, u).d_levels[0], -0.05);
  const SystemState next = integrate_step(p, s, u);
  EXPECT_EQ(next.levels[0], 0.0);
  EXPECT_DOUBLE_EQ(next.levels[1], 0.05);
}

TEST(IntegrateStep, StaysWithinTankBounds) {
  Rng rng = make_rng(5);
  for (int trial = 0; trial < 5000; ++trial) {
    const SystemParams p = random_params(rng);
    SystemState s = random_state(rng);
    for (std::size_t i = 0; i < kTanks; ++i) s.levels[i] *= p.tank_heights[i];
    const ValveAction u = ValveAction::from_mask(static_cast<unsigned>(uniform_int(rng, 0, 63)));
    const SystemState next = integrate_step(p, s, u);
    for (std::size_t i = 0; i < kTanks; ++i) {
      EXPECT_GE(next.levels[i], 0.0);
      EXPECT_LE(next.levels[i], p.tank_heights[i]);
    }
  }
}

TEST(Conservation, ZeroDemandClosedValvesKeepsFuel) {
  SystemParams p;
  p.engine_demands = {0.0, 0.0, 0.0, 0.0};
  SystemState s = levels({0.9, 0.1, 0.4, 0.6, 0.3, 0.8});
  const double initial = s.total_fuel(p);
  for (int t = 0; t < 10000; ++t) s = integrate_step(p, s, ValveAction::all_closed());
  EXPECT_LE(std::abs(s.total_fuel(p) - initial), 1e-12 * 10000);
}

TEST(Conservation, ZeroDemandOpenValvesConserveUntilClamp) {
  SystemParams p;
  p.engine_demands = {0.0, 0.0, 0.0, 0.0};
  SystemState s = levels({0.9, 0.1, 0.4, 0.6, 0.3, 0.8});
  const double initial = s.total_fuel(p);
  for (int t = 0; t < 1000; ++t) s = integrate_step(p, s, ValveAction::all_open());
  EXPECT_NEAR(s.total_fuel(p), initial, 1e-9);
  for (double x : s.levels) EXPECT_NEAR(x, initial / 6.0, 1e-6);
}

TEST(Conservation, ClosedValvesDrainMonotonically) {
  const SystemParams p;
  SystemState s = SystemState::full(p);
  double prev = s.total_fuel(p);
  for (int t = 0; t < 80; ++t) {
    s = integrate_step(p, s, ValveAction::all_closed());
    const double now = s.total_fuel(p);
    EXPECT_LE(now, prev);
    prev = now;
  }
}

TEST(Mirror, DerivativeIsMirrorSymmetric) {
  Rng rng = make_rng(6);
  for (int trial = 0; trial < 5000; ++trial) {
    const SystemParams p = random_params(rng);
    const SystemState s = random_state(rng);
    const ValveAction u = ValveAction::from_mask(static_cast<unsigned>(uniform_int(rng, 0, 63)));
    const StateDerivative d = derivative(p, s, u);
    const StateDerivative dm = derivative(mirrored(p), mirrored(s), mirrored(u));
    for (std::size_t i = 0; i < kTanks; ++i) EXPECT_NEAR(dm.d_levels[i], d.d_levels[kTanks - 1 - i], 1e-12);
  }
}

TEST(Mirror, IsAnInvolution) {
  Rng rng = make_rng(7);
  const SystemParams p = random_params(rng);
  EXPECT_EQ(mirrored(mirrored(p)), p);
  EXPECT_EQ(mirrored(p).engine_demands[0], p.engine_demands[3]);
  EXPECT_EQ(mirrored(p).valve_resistances[0], p.valve_resistances[5]);
}

TEST(Degradation, IntervalZeroIsNominal) {
  DegradationProfile d;
  d.engine_demand_factors[0] = 20.0;
  d.valve_resistance_factors[4] = 20.0;
  d.pump_capacity_factors[1] = 15.0;
  const SystemParams nominal;
  EXPECT_EQ(apply_degradation(nominal, d, 0), nominal);
}

TEST(Degradation, EngineDemandGrowsLinearly) {
  DegradationProfile d;
  d.engine_demand_factors[0] = 20.0;
  const SystemParams p = apply_degradation(SystemParams{}, d, 10);
  EXPECT_DOUBLE_EQ(p.engine_demands[0], 0.0375);
  EXPECT_DOUBLE_EQ(p.engine_demands[1], 0.025);
}

TEST(Degradation, EndpointsDoubleOrVanish) {
  DegradationProfile d;
  d.engine_demand_factors[2] = 20.0;
  d.valve_resistance_factors[5] = 20.0;
  d.pump_capacity_factors[3] = 20.0;
  const SystemParams nominal;
  const SystemParams p = apply_degradation(nominal, d, 20);
  EXPECT_EQ(p.engine_demands[2], 2.0 * nominal.engine_demands[2]);
  EXPECT_EQ(p.valve_resistances[5], 2.0 * nominal.valve_resistances[5]);
  EXPECT_EQ(p.pump_capacities[3], 0.0);
  EXPECT_EQ(apply_degradation(nominal, d, 35).pump_capacities[3], 0.0);
}

TEST(Degradation, NominalIsNotMutated) {
  DegradationProfile d;
  d.valve_resistance_factors[0] = 5.0;
  const SystemParams nominal;
  const SystemParams copy = nominal;
  (void)apply_degradation(nominal, d, 7);
  EXPECT_EQ(nominal, copy);
}

TEST(Degradation, RejectsNonPositiveFactors) {
  for (double bad : {0.0, -1.0, std::nan("")}) {
    DegradationProfile d;
    d.pump_capacity_factors[2] = bad;
    EXPECT_THROW(apply_degradation(SystemParams{}, d, 1), std::invalid_argument);
  }
}

TEST(SystemParams, ValidateRejectsBadValues) {
  SystemParams p;
  EXPECT_NO_THROW(p.validate());
  p.tank_heights[3] = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.pump_capacities[0] = -0.1;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.dt = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(ValveAction, MaskRoundTrip) {
  const ValveAction u = ValveAction::from_mask(0b100101);
  EXPECT_TRUE(u.open[0]);
  EXPECT_FALSE(u.open[1]);
  EXPECT_TRUE(u.open[2]);
  EXPECT_TRUE(u.open[5]);
  EXPECT_EQ(u.open_count(), 3u);
  EXPECT_DOUBLE_EQ(u.mean(), 0.5);
  EXPECT_EQ(ValveAction::from_mask(63), ValveAction::all_open());
}
