// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "ftc/ftc.hpp"

using namespace ftc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& name, const std::function<Outcome()>& check) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.pass) ++failures;
  fmt::print("{} {}: {} [{:.1f}s]\n", o.pass ? "PASS" : "FAIL", name, o.detail, secs);
  std::fflush(stdout);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); }

nn::Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  nn::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = 2.0 * uniform01(rng) - 1.0;
  return m;
}

SystemState random_state(Rng& rng) {
  SystemState s;
  for (double& x : s.levels) x = uniform01(rng);
  return s;
}

ValveAction random_action(Rng& rng) { return ValveAction::from_mask(static_cast<unsigned>(uniform_int(rng, 0, 63))); }

double final_mean(const std::vector<IntervalMetrics>& m, std::size_t last) {
  double s = 0.0;
  for (std::size_t k = m.size() - last; k < m.size(); ++k) s += m[k].mean_reward;
  return s / static_cast<double>(last);
}

Outcome physics() {
  Rng rng = make_rng(1);
  double worst_flux = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const ValveFlows f = valve_flows(SystemParams{}, random_state(rng), random_action(rng));
    double s = 0.0;
    for (double v : f.flux) s += v;
    worst_flux = std::max(worst_flux, std::abs(s));
  }

  SystemParams still;
  still.engine_demands = {0.0, 0.0, 0.0, 0.0};
  SystemState x = random_state(rng);
  const double initial = x.total_fuel(still);
  double worst_drift = 0.0;
  double prev = initial;
  for (int t = 0; t < 10000; ++t) {
    x = integrate_step(still, x, ValveAction::all_closed());
    const double now = x.total_fuel(still);
    worst_drift = std::max(worst_drift, std::abs(now - prev));
    prev = now;
  }

  double worst_mirror = 0.0;
  for (int i = 0; i < 10000; ++i) {
    SystemParams p;
    for (double& e : p.engine_demands) e = 0.01 + 0.05 * uniform01(rng);
    for (double& r : p.valve_resistances) r = 50.0 + 100.0 * uniform01(rng);
    const SystemState s = random_state(rng);
    const ValveAction u = random_action(rng);
    const StateDerivative d = derivative(p, s, u);
    const StateDerivative dm = derivative(mirrored(p), mirrored(s), mirrored(u));
    for (std::size_t j = 0; j < kTanks; ++j) {
      worst_mirror = std::max(worst_mirror, std::abs(dm.d_levels[j] - d.d_levels[kTanks - 1 - j]));
    }
  }
  return {worst_flux <= 1e-9 && worst_drift <= 1e-12 && worst_mirror <= 1e-12,
          fmt::format("max |sum flux| {:.2e} (<= 1e-9), max drift/step {:.2e} (<= 1e-12), max mirror error {:.2e} "
                      "(<= 1e-12)",
                      worst_flux, worst_drift, worst_mirror)};
}

Outcome episode_length() {
  FuelTankEnv env{EnvConfig{}};
  env.reset(0);
  std::size_t steps = 0;
  while (!env.done()) {
    env.step(ValveAction::all_closed());
    ++steps;
  }
  // 60 is also what an independent scripted rollout gives.
  return {steps == 60, fmt::format("{} steps (expected 60)", steps)};
}

Outcome reward_identities() {
  const SystemParams p;
  const RewardBreakdown full = reward(SystemState::full(p), ValveAction::all_closed(), p, kDefaultMomentArms);
  const bool a = std::abs(full.r_cg) <= 1e-12 && std::abs(full.r_var - 14.0 / 3.0) <= 1e-12 &&
                 std::abs(full.total - 14.0 / 3.0) <= 1e-12;
  SystemState right;
  right.levels = {0, 0, 0, 0, 0, 0.7};
  bool b = true;
  for (unsigned mask = 0; mask < 64; ++mask) {
    const RewardBreakdown r = reward(right, ValveAction::from_mask(mask), p, kDefaultMomentArms);
    b = b && r.total == -r.r_u;
  }
  return {a && b, fmt::format("symmetric full state ({}, {}, {}); all-in-tank-6 total == -r_u for all 64 actions: {}",
                              full.r_cg, full.r_var, full.total, b)};
}

struct GridRun {
  std::size_t rows = 0;
  double r2_64x64 = 0.0;
  double r2_32x3 = 0.0;
};

std::vector<GridRun> grid_runs;

void run_grids() {
  const std::vector<nn::GridCell> grid = {
      {{32, 32}, 1e-3, nn::Activation::relu},
      {{32, 32, 32}, 1e-3, nn::Activation::relu},
      {{64, 64}, 1e-3, nn::Activation::relu},
      {{128, 128}, 1e-3, nn::Activation::relu},
  };
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const TransitionDataset ds = generate_dataset(EnvConfig{}, 50, seed);
    GridRun run;
    run.rows = ds.size();
    for (const nn::GridResult& r : nn::grid_search(ds.data, grid, 3, seed)) {
      if (r.grid_index == 2) run.r2_64x64 = r.cv.mean_r2;
      if (r.grid_index == 1) run.r2_32x3 = r.cv.mean_r2;
    }
    grid_runs.push_back(run);
  }
}

Outcome surrogate_quality() {
  if (grid_runs.empty()) run_grids();
  int ok = 0;
  std::string detail;
  for (const GridRun& g : grid_runs) {
    if (g.rows >= 2950 && g.r2_64x64 >= 0.99) ++ok;
    detail += fmt::format(" {:.4f}({} rows)", g.r2_64x64, g.rows);
  }
  return {ok >= 4, fmt::format("3-fold CV mean R2 of (64,64) relu lr 1e-3 >= 0.99 in {}/5 seeds:{}", ok, detail)};
}

Outcome grid_ordering() {
  if (grid_runs.empty()) run_grids();
  int ok = 0;
  std::string detail;
  for (const GridRun& g : grid_runs) {
    if (g.r2_64x64 >= g.r2_32x3) ++ok;
    detail += fmt::format(" {:.4f}/{:.4f}", g.r2_64x64, g.r2_32x3);
  }
  return {ok >= 4, fmt::format("(64,64) >= (32,32,32) in {}/5 seeds (64x64/32x3):{}", ok, detail)};
}

Outcome gradient_checks() {
  Rng rng = make_rng(3);
  const double h = 1e-5;
  double worst_mlp = 0.0;
  for (const nn::MlpSpec& spec : {nn::MlpSpec{{3, 8, 8, 2}, nn::Activation::tanh}, nn::MlpSpec{{4, 8, 8, 3}}}) {
    nn::MlpParams p = nn::init_params(spec, 7);
    const nn::Matrix x = random_matrix(static_cast<Eigen::Index>(spec.inputs()), 9, rng);
    const nn::Matrix y = random_matrix(static_cast<Eigen::Index>(spec.outputs()), 9, rng);
    const nn::ForwardCache c = nn::forward(p, x);
    const nn::Vector g = nn::backward(p, c, 2.0 * (c.output - y) / 9.0);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      nn::MlpParams a = p, b = p;
      a.values()(i) += h;
      b.values()(i) -= h;
      const double numeric = (nn::mse(nn::predict(a, x), y) - nn::mse(nn::predict(b, x), y)) / (2 * h);
      worst_mlp = std::max(worst_mlp, rel_err(g(i), numeric));
    }
  }

  ActorCriticParams params = init_actor_critic(5, {8, 8}, 1.0);
  PpoBatch batch;
  for (int i = 0; i < 12; ++i) {
    const SystemState s = random_state(rng);
    const PolicyOutput po = policy_forward(params, s);
    const SampledAction a = sample_action(po.probabilities, rng);
    batch.states.push_back(s);
    batch.actions.push_back(a.action);
    batch.old_log_probs.push_back(a.log_prob + 0.8 * (uniform01(rng) - 0.5));
    batch.returns.push_back(5.0 * uniform01(rng));
    batch.old_values.push_back(po.value);
  }
  const PpoConfig cfg;
  const PpoLoss loss = ppo_loss(params, batch, cfg);
  double worst_ppo = 0.0;
  auto check = [&](nn::MlpParams ActorCriticParams::*net, const nn::Vector& grads) {
    for (Eigen::Index i = 0; i < grads.size(); ++i) {
      ActorCriticParams a = params, b = params;
      (a.*net).values()(i) += h;
      (b.*net).values()(i) -= h;
      const double numeric = (ppo_loss(a, batch, cfg).total - ppo_loss(b, batch, cfg).total) / (2 * h);
      worst_ppo = std::max(worst_ppo, rel_err(grads(i), numeric));
    }
  };
  check(&ActorCriticParams::trunk, loss.grads.trunk);
  check(&ActorCriticParams::policy, loss.grads.policy);
  check(&ActorCriticParams::value, loss.grads.value);
  return {worst_mlp <= 1e-4 && worst_ppo <= 1e-4,
          fmt::format("max relative error: MLP regression {:.2e}, PPO loss {:.2e} (<= 1e-4)", worst_mlp, worst_ppo)};
}

Outcome clip_values() {
  const double a = clipped_objective(1.5, 1.0, 0.2);
  const double b = clipped_objective(0.5, -1.0, 0.2);
  return {a == 1.2 && b == -0.8, fmt::format("(1.5, +1, 0.2) -> {}; (0.5, -1, 0.2) -> {}", a, b)};
}

class ToyEnv {
 public:
  SystemState reset(std::size_t) {
    done_ = false;
    return state();
  }
  StepResult step(const ValveAction& u) {
    StepResult r;
    r.reward.r_u = u.mean();
    r.reward.total = u.mean();
    ++episodes_;
    done_ = true;
    r.done = true;
    r.next_state = state();
    return r;
  }
  SystemState state() const {
    SystemState s;
    s.levels.fill(episodes_ % 2 == 0 ? 0.2 : 0.8);
    return s;
  }
  bool done() const { return done_; }

 private:
  std::size_t episodes_ = 0;
  bool done_ = false;
};

Outcome toy_learning() {
  int ok = 0;
  std::string detail;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    PpoAgent agent = PpoAgent::create(seed);
    Rng act = make_rng(seed, 1), upd = make_rng(seed, 2);
    ToyEnv env;
    env.reset(0);
    LoopCounters counters;
    detail::run_learning_phase(env, 0, 50 * agent.config.t_update, agent, act, upd, counters,
                               [](const SystemState&, const ValveAction&, const StepResult&, bool) {});
    double mean_p = 0.0;
    for (double level : {0.2, 0.8}) {
      SystemState s;
      s.levels.fill(level);
      for (double p : policy_forward(agent.params, s).probabilities) mean_p += p / 12.0;
    }
    if (counters.policy_updates == 50 && mean_p > 0.9) ++ok;
    detail += fmt::format(" {:.3f}", mean_p);
  }
  return {ok >= 4, fmt::format("mean open probability > 0.9 after 50 updates in {}/5 seeds:{}", ok, detail)};
}

Outcome baseline_shapes() {
  const auto r = run_protocol(single_fault_profile(), 0, {},
                              {ControlMode::all_valves_open, ControlMode::all_valves_closed});
  const auto& open = r[0].intervals;
  const auto& closed = r[1].intervals;
  bool decreasing = true;
  for (std::size_t k = 1; k < closed.size(); ++k) decreasing = decreasing && closed[k].mean_reward < closed[k - 1].mean_reward;
  return {closed[0].mean_reward > open[0].mean_reward && decreasing,
          fmt::format("closed k=0 {:.4f} > open k=0 {:.4f}; closed strictly decreasing k=0..9: {} (k=9 {:.4f})",
                      closed[0].mean_reward, open[0].mean_reward, decreasing, closed.back().mean_reward)};
}

Outcome rl_efficacy() {
  int wins = 0;
  std::string single;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto r = run_protocol(single_fault_profile(), seed, {},
                                {ControlMode::rl_online_offline, ControlMode::all_valves_closed});
    const double rl = final_mean(r[0].intervals, 3);
    const double closed = final_mean(r[1].intervals, 3);
    if (rl > closed) ++wins;
    single += fmt::format(" {:.3f}/{:.3f}", rl, closed);
  }

  std::vector<double> offline, online;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const AggregateResult a =
        run_aggregate(5, seed, {}, {ControlMode::rl_online_offline, ControlMode::rl_online_only});
    offline.push_back(a.mean_reward.back()[0]);
    online.push_back(a.mean_reward.back()[1]);
  }
  const double med_off = median(offline), med_on = median(online);
  return {wins >= 3 && med_off >= med_on,
          fmt::format("single fault: rl-online-offline beats closed on final-3 mean in {}/5 seeds (need 3; "
                      "rl/closed:{}); aggregate (5 trials) final-interval median over 5 seeds: online-offline {:.4f} "
                      ">= online-only {:.4f}",
                      wins, single, med_off, med_on)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() / "ftc_acceptance_cli";
  fs::remove_all(root);
  const std::string lab = FTC_LAB_PATH;
  const std::vector<std::string> commands = {
      "gen-data --episodes 10 --seed 11 --out {d}/data.csv",
      "train-surrogate --data {d}/data.csv --seed 11 --out {d}/model.json",
      "run --mode rl-online-offline --fault single --seed 11 --intervals 2 --out-dir {d}/run",
      "run --mode rl-online-only --fault multi --seed 11 --intervals 2 --out-dir {d}/run",
      "run --mode closed --fault single --seed 11 --out-dir {d}/run",
      "aggregate --trials 2 --seed 11 --intervals 2 --t-online 256 --t-offline 512 --out-dir {d}/agg",
      "plot --in {d}/run --out {d}/plots",
  };
  for (const char* rep : {"a", "b"}) {
    const std::string d = (root / rep).string();
    fs::create_directories(d);
    for (std::string cmd : commands) {
      for (auto pos = cmd.find("{d}"); pos != std::string::npos; pos = cmd.find("{d}")) cmd.replace(pos, 3, d);
      const std::string line = "\"" + lab + "\" " + cmd + " > /dev/null";
      if (std::system(line.c_str()) != 0) return {false, "command failed: " + cmd};
    }
  }
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), root / "a");
    if (slurp(e.path()) != slurp(root / "b" / rel)) return {false, rel.string() + " differs between runs"};
    ++files;
  }
  fs::remove_all(root);
  return {files >= 15, fmt::format("{} output files byte-identical across repeated runs", files)};
}

}  // namespace

int main() {
  criterion("physics conservation suite", physics);
  criterion("episode length oracle", episode_length);
  criterion("reward identities", reward_identities);
  criterion("surrogate quality", surrogate_quality);
  criterion("grid-search ordering", grid_ordering);
  criterion("gradient checks", gradient_checks);
  criterion("PPO clip unit values", clip_values);
  criterion("toy-environment learning", toy_learning);
  criterion("baseline shapes", baseline_shapes);
  criterion("RL efficacy", rl_efficacy);
  criterion("CLI determinism", cli_determinism);
  fmt::print("{} of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
