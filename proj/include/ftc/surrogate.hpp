#pragma once

// Learned transition model (x_t, u_t) -> x_{t+1}: random-action dataset
// generation, fitting, prediction and a model-backed offline environment.

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "ftc/env.hpp"
#include "ftc/errors.hpp"
#include "ftc/nn.hpp"
#include "ftc/random.hpp"
#include "ftc/sim.hpp"

namespace ftc {

inline constexpr std::size_t kTransitionInputs = 2 * kTanks;
inline constexpr std::size_t kTransitionOutputs = kTanks;

/// Rows of x ⊕ u (12 columns) mapped to x' (6 columns).
struct TransitionDataset {
  nn::Dataset data{nn::Matrix(0, kTransitionInputs), nn::Matrix(0, kTransitionOutputs)};

  std::size_t size() const { return data.size(); }
};

/// Accumulates transitions row by row.
class TransitionRecorder {
 public:
  void add(const SystemState& x, const ValveAction& u, const SystemState& next) {
    for (double v : x.levels) inputs_.push_back(v);
    for (bool open : u.open) inputs_.push_back(open ? 1.0 : 0.0);
    for (double v : next.levels) targets_.push_back(v);
  }
  std::size_t size() const { return targets_.size() / kTransitionOutputs; }
  void clear() {
    inputs_.clear();
    targets_.clear();
  }

  TransitionDataset dataset() const {
    const auto n = static_cast<Eigen::Index>(size());
    TransitionDataset out;
    out.data.inputs = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        inputs_.data(), n, static_cast<Eigen::Index>(kTransitionInputs));
    out.data.targets = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        targets_.data(), n, static_cast<Eigen::Index>(kTransitionOutputs));
    return out;
  }

 private:
  std::vector<double> inputs_;
  std::vector<double> targets_;
};

struct HoldRange {
  std::size_t min_steps = 1;
  std::size_t max_steps = 0;  // 0: half the nominal episode length
};

/// Runs `episodes` episodes of the true system at interval 0 under random
/// valve settings. Each setting is uniform over the 64 combinations and is
/// held for a uniform number of steps in the hold range.
inline TransitionDataset generate_dataset(const EnvConfig& config, std::size_t episodes,
                                          std::uint64_t seed, HoldRange hold = {}) {
  if (episodes == 0) throw std::invalid_argument("generate_dataset: episodes must be >= 1");
  if (hold.max_steps == 0) {
    hold.max_steps = std::max<std::size_t>(1, closed_valve_episode_length(config.nominal_params) / 2);
  }
  if (hold.min_steps == 0 || hold.min_steps > hold.max_steps) {
    throw std::invalid_argument("generate_dataset: invalid hold range");
  }
  Rng rng = make_rng(seed, 0x6461);
  FuelTankEnv env(config);
  TransitionRecorder recorder;
  for (std::size_t e = 0; e < episodes; ++e) {
    env.reset(0);
    std::size_t hold_left = 0;
    ValveAction u;
    while (!env.done()) {
      if (hold_left == 0) {
        u = ValveAction::from_mask(static_cast<unsigned>(uniform_int(rng, 0, 63)));
        hold_left = uniform_int(rng, hold.min_steps, hold.max_steps);
      }
      const SystemState x = env.state();
      const StepResult r = env.step(u);
      recorder.add(x, u, r.next_state);
      --hold_left;
    }
  }
  return recorder.dataset();
}

struct SurrogateOptions {
  std::vector<std::size_t> hidden{64, 64};
  nn::Activation activation = nn::Activation::relu;
  double learning_rate = 1e-3;
  std::size_t max_epochs = 200;
  std::size_t patience = 10;
  std::size_t min_rows = 100;

  nn::MlpSpec spec() const {
    return nn::GridCell{hidden, learning_rate, activation}.spec(kTransitionInputs, kTransitionOutputs);
  }
};

struct SurrogateModel {
  nn::MlpParams params;
  TankVector tank_heights = filled<double, kTanks>(1.0);
  double r2 = 0.0;  // on the held-out validation split
  std::size_t samples = 0;
  std::size_t source_interval = 0;
  std::size_t epochs = 0;
};

inline SurrogateModel fit_surrogate(const TransitionDataset& dataset, const SurrogateModel* warm_start,
                                    std::uint64_t seed, const SurrogateOptions& options = {},
                                    const TankVector& tank_heights = filled<double, kTanks>(1.0),
                                    std::size_t source_interval = 0) {
  if (dataset.size() < options.min_rows) {
    throw std::invalid_argument("fit_surrogate: need at least " + std::to_string(options.min_rows) +
                                " rows, got " + std::to_string(dataset.size()));
  }
  nn::TrainOptions train;
  train.learning_rate = options.learning_rate;
  train.max_epochs = options.max_epochs;
  train.patience = options.patience;
  train.seed = seed;
  const nn::TrainResult fit =
      nn::train_regressor(dataset.data, options.spec(), train, warm_start ? &warm_start->params : nullptr);
  SurrogateModel model;
  model.params = fit.params;
  model.tank_heights = tank_heights;
  model.r2 = fit.validation_r2;
  model.samples = dataset.size();
  model.source_interval = source_interval;
  model.epochs = fit.history.epochs();
  return model;
}

inline Eigen::VectorXd transition_input(const SystemState& x, const ValveAction& u) {
  Eigen::VectorXd in(static_cast<Eigen::Index>(kTransitionInputs));
  for (std::size_t i = 0; i < kTanks; ++i) {
    in(static_cast<Eigen::Index>(i)) = x.levels[i];
    in(static_cast<Eigen::Index>(kTanks + i)) = u.open[i] ? 1.0 : 0.0;
  }
  return in;
}

/// One-step prediction, clamped to the physical range [0, h].
inline SystemState predict_next(const SurrogateModel& model, const SystemState& x, const ValveAction& u) {
  const nn::Matrix out = nn::predict(model.params, transition_input(x, u));
  SystemState next;
  for (std::size_t i = 0; i < kTanks; ++i) {
    next.levels[i] = std::clamp(out(static_cast<Eigen::Index>(i), 0), 0.0, model.tank_heights[i]);
  }
  return next;
}

/// Offline episodes are cut after this many nominal episode lengths.
inline constexpr std::size_t kOfflineEpisodeCapFactor = 3;

/// Environment whose dynamics come from `Dynamics` while reward and
/// termination use the true rules on the predicted states.
template <class Dynamics>
  requires std::invocable<const Dynamics&, const SystemState&, const ValveAction&>
class ModelEnv {
 public:
  ModelEnv(EnvConfig config, Dynamics dynamics, std::size_t step_cap)
      : config_(std::move(config)), dynamics_(std::move(dynamics)), step_cap_(step_cap) {
    config_.validate();
    active_ = config_.nominal_params;
    state_ = SystemState::full(active_);
  }

  SystemState reset(std::size_t interval) {
    interval_ = interval;
    active_ = apply_degradation(config_.nominal_params, config_.profile, interval);
    state_ = SystemState::full(active_);
    steps_ = 0;
    done_ = is_terminal(state_, active_);
    return state_;
  }

  StepResult step(const ValveAction& action) {
    if (done_) throw std::logic_error("ModelEnv::step after episode end; call reset()");
    StepResult out;
    out.reward = reward(state_, action, active_, config_.moment_arms);
    const SystemState predicted = dynamics_(state_, action);
    for (std::size_t i = 0; i < kTanks; ++i) {
      out.next_state.levels[i] = std::clamp(predicted.levels[i], 0.0, active_.tank_heights[i]);
    }
    ++steps_;
    out.done = is_terminal(out.next_state, active_);
    if (!out.done && steps_ >= step_cap_) {
      out.done = true;
      out.truncated = true;
    }
    state_ = out.next_state;
    done_ = out.done;
    return out;
  }

  const SystemState& state() const { return state_; }
  bool done() const { return done_; }
  std::size_t episode_steps() const { return steps_; }
  std::size_t step_cap() const { return step_cap_; }
  const SystemParams& active_params() const { return active_; }

 private:
  EnvConfig config_;
  Dynamics dynamics_;
  std::size_t step_cap_;
  SystemParams active_;
  SystemState state_;
  std::size_t steps_ = 0;
  std::size_t interval_ = 0;
  bool done_ = false;
};

struct SurrogateDynamics {
  SurrogateModel model;
  SystemState operator()(const SystemState& x, const ValveAction& u) const { return predict_next(model, x, u); }
};

inline ModelEnv<SurrogateDynamics> offline_env(SurrogateModel model, const EnvConfig& config,
                                               std::size_t interval) {
  const std::size_t cap = kOfflineEpisodeCapFactor * closed_valve_episode_length(config.nominal_params);
  ModelEnv<SurrogateDynamics> env(config, SurrogateDynamics{std::move(model)}, cap);
  env.reset(interval);
  return env;
}

static_assert(Environment<ModelEnv<SurrogateDynamics>>);

// ---------------------------------------------------------------------------
// CSV persistence

inline std::string transition_csv_header() {
  std::string h;
  for (std::size_t i = 1; i <= kTanks; ++i) h += fmt::format("x{},", i);
  for (std::size_t i = 1; i <= kTanks; ++i) h += fmt::format("u{},", i);
  for (std::size_t i = 1; i <= kTanks; ++i) h += fmt::format("y{}{}", i, i < kTanks ? "," : "");
  return h;
}

inline void write_dataset_csv(std::ostream& out, const TransitionDataset& ds) {
  out << transition_csv_header() << '\n';
  const auto& in = ds.data.inputs;
  const auto& tg = ds.data.targets;
  for (Eigen::Index r = 0; r < in.rows(); ++r) {
    std::string line;
    for (Eigen::Index c = 0; c < in.cols(); ++c) line += fmt::format("{},", in(r, c));
    for (Eigen::Index c = 0; c < tg.cols(); ++c) line += fmt::format("{}{}", tg(r, c), c + 1 < tg.cols() ? "," : "");
    out << line << '\n';
  }
}

inline TransitionDataset read_dataset_csv(std::istream& in, const std::filesystem::path& source = "<stream>") {
  std::string line;
  if (!std::getline(in, line)) throw IoError(source, "empty dataset file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != transition_csv_header()) throw IoError(source, "unexpected dataset header '" + line + "'");
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::size_t fields = 0;
    while (std::getline(ss, field, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(field, &used));
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw IoError(source, fmt::format("row {}: bad number '{}'", rows + 1, field));
      }
      ++fields;
    }
    if (fields != kTransitionInputs + kTransitionOutputs) {
      throw IoError(source, fmt::format("row {}: expected {} fields, got {}", rows + 1,
                                        kTransitionInputs + kTransitionOutputs, fields));
    }
    ++rows;
  }
  TransitionDataset ds;
  const auto n = static_cast<Eigen::Index>(rows);
  ds.data.inputs.resize(n, static_cast<Eigen::Index>(kTransitionInputs));
  ds.data.targets.resize(n, static_cast<Eigen::Index>(kTransitionOutputs));
  const std::size_t width = kTransitionInputs + kTransitionOutputs;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const double v = values[r * width + c];
      if (c < kTransitionInputs) {
        ds.data.inputs(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
      } else {
        ds.data.targets(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c - kTransitionInputs)) = v;
      }
    }
  }
  return ds;
}

inline void save_dataset_csv(const std::filesystem::path& path, const TransitionDataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path, "cannot open for writing");
  write_dataset_csv(out, ds);
  if (!out) throw IoError(path, "write failed");
}

inline TransitionDataset load_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  return read_dataset_csv(in, path);
}

inline nlohmann::json to_json(const SurrogateModel& m) {
  return {{"network", nn::to_json(m.params)},
          {"tank_heights", m.tank_heights},
          {"r2", m.r2},
          {"samples", m.samples},
          {"source_interval", m.source_interval},
          {"epochs", m.epochs}};
}

inline SurrogateModel surrogate_from_json(const nlohmann::json& j) {
  SurrogateModel m;
  m.params = nn::mlp_from_json(j.at("network"));
  if (m.params.spec().inputs() != kTransitionInputs || m.params.spec().outputs() != kTransitionOutputs) {
    throw std::invalid_argument("surrogate json: network must map 12 inputs to 6 outputs");
  }
  m.tank_heights = j.at("tank_heights").get<TankVector>();
  m.r2 = j.at("r2").get<double>();
  m.samples = j.at("samples").get<std::size_t>();
  m.source_interval = j.at("source_interval").get<std::size_t>();
  m.epochs = j.at("epochs").get<std::size_t>();
  return m;
}

}  // namespace ftc
