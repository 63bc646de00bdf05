// Command-line front end: dataset generation, model selection, surrogate
// training, control-loop runs, aggregate trials and plotting.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "ftc/ftc.hpp"

namespace fs = std::filesystem;
using namespace ftc;

namespace {

struct LoopOverrides {
  std::optional<std::size_t> intervals, t_online, t_offline, t_update, pretrain_episodes;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--intervals", intervals, "Number of degradation intervals");
    cmd->add_option("--t-online", t_online, "Online steps per interval");
    cmd->add_option("--t-offline", t_offline, "Offline steps per interval");
    cmd->add_option("--t-update", t_update, "Steps between policy updates");
    cmd->add_option("--pretrain-episodes", pretrain_episodes, "Episodes used to pretrain the system model");
  }

  TrialConfig apply(TrialConfig c) const {
    if (intervals) c.intervals = *intervals;
    if (t_online) c.t_online = *t_online;
    if (t_offline) c.t_offline = *t_offline;
    if (t_update) c.ppo.t_update = *t_update;
    if (pretrain_episodes) c.pretrain_episodes = *pretrain_episodes;
    return c;
  }
};

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path, "cannot open for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError(path, "write failed");
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path, e.what());
  }
}

std::string hidden_label(const std::vector<std::size_t>& hidden) {
  std::string s;
  for (std::size_t i = 0; i < hidden.size(); ++i) s += (i ? "-" : "") + std::to_string(hidden[i]);
  return s;
}

std::vector<nn::GridCell> reduced_grid() {
  std::vector<nn::GridCell> grid;
  for (std::vector<std::size_t> h : {std::vector<std::size_t>{32, 32}, {32, 32, 32}, {64, 64}, {128, 128}}) {
    grid.push_back({h, 1e-3, nn::Activation::relu});
  }
  return grid;
}

DegradationProfile fault_profile(const std::string& fault) {
  if (fault == "none") return {};
  if (fault == "single") return single_fault_profile();
  if (fault == "multi") return multi_fault_profile();
  throw ConfigError("unknown fault '" + fault + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fuel-transfer fault-tolerant control experiments"};
  app.require_subcommand(1);

  // gen-data
  std::size_t gd_episodes = 50;
  std::uint64_t gd_seed = 0;
  std::size_t gd_hold_min = 1, gd_hold_max = 0;
  fs::path gd_out;
  auto* gen = app.add_subcommand("gen-data", "Record random-action transitions of the nominal system");
  gen->add_option("--episodes", gd_episodes, "Episodes to record")->capture_default_str();
  gen->add_option("--seed", gd_seed, "Random seed")->capture_default_str();
  gen->add_option("--hold-min", gd_hold_min, "Minimum steps an action is held")->capture_default_str();
  gen->add_option("--hold-max", gd_hold_max, "Maximum steps an action is held (0: half an episode)")
      ->capture_default_str();
  gen->add_option("--out", gd_out, "Output CSV")->required();

  // grid-search
  fs::path gs_data, gs_out;
  std::size_t gs_folds = 3;
  std::uint64_t gs_seed = 0;
  std::string gs_grid = "full";
  auto* grid = app.add_subcommand("grid-search", "Cross-validate network architectures on a dataset");
  grid->add_option("--data", gs_data, "Transition CSV")->required();
  grid->add_option("--folds", gs_folds, "Cross-validation folds")->capture_default_str();
  grid->add_option("--seed", gs_seed, "Random seed")->capture_default_str();
  grid->add_option("--grid", gs_grid, "full (36 cells) or reduced (4 cells)")
      ->check(CLI::IsMember({"full", "reduced"}))
      ->capture_default_str();
  grid->add_option("--out", gs_out, "Output CSV")->required();

  // train-surrogate
  fs::path ts_data, ts_out;
  std::uint64_t ts_seed = 0;
  auto* train = app.add_subcommand("train-surrogate", "Fit the transition model on a dataset");
  train->add_option("--data", ts_data, "Transition CSV")->required();
  train->add_option("--seed", ts_seed, "Random seed")->capture_default_str();
  train->add_option("--out", ts_out, "Output model JSON")->required();

  // run
  std::string run_mode, run_fault = "single";
  std::uint64_t run_seed = 0;
  fs::path run_out, run_model;
  LoopOverrides run_overrides;
  auto* run = app.add_subcommand("run", "Run one trial of the control loop");
  run->add_option("--mode", run_mode, "rl-online-offline, rl-online-only, open or closed")->required();
  run->add_option("--fault", run_fault, "none, single or multi")
      ->check(CLI::IsMember({"none", "single", "multi"}))
      ->capture_default_str();
  run->add_option("--seed", run_seed, "Random seed")->capture_default_str();
  run->add_option("--out-dir", run_out, "Output directory")->required();
  run->add_option("--surrogate", run_model, "Pretrained model JSON (rl-online-offline only)");
  run_overrides.add_to(run);

  // aggregate
  std::size_t ag_trials = 20;
  std::uint64_t ag_seed = 0;
  fs::path ag_out;
  std::vector<std::string> ag_modes;
  LoopOverrides ag_overrides;
  auto* aggregate = app.add_subcommand("aggregate", "Randomized valve and pump degradation trials");
  aggregate->add_option("--trials", ag_trials, "Number of trials")->capture_default_str();
  aggregate->add_option("--seed", ag_seed, "Random seed")->capture_default_str();
  aggregate->add_option("--out-dir", ag_out, "Output directory")->required();
  aggregate->add_option("--modes", ag_modes, "Modes to run (default: all)");
  ag_overrides.add_to(aggregate);

  // plot
  fs::path pl_in, pl_out;
  auto* plot = app.add_subcommand("plot", "Render SVG charts from result CSVs");
  plot->add_option("--in", pl_in, "Directory with result CSVs")->required();
  plot->add_option("--out", pl_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*gen) {
      const TransitionDataset ds = generate_dataset(EnvConfig{}, gd_episodes, gd_seed, {gd_hold_min, gd_hold_max});
      save_dataset_csv(gd_out, ds);
      fmt::print("wrote {} transitions to {}\n", ds.size(), gd_out.string());
    } else if (*grid) {
      const TransitionDataset ds = load_dataset_csv(gs_data);
      const auto cells = gs_grid == "full" ? nn::full_transition_grid() : reduced_grid();
      const auto results = nn::grid_search(ds.data, cells, gs_folds, gs_seed);
      std::ofstream out(gs_out, std::ios::binary);
      if (!out) throw IoError(gs_out, "cannot open for writing");
      out << "rank,grid_index,hidden,learning_rate,activation,mean_r2,fold_r2\n";
      for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        std::string folds;
        for (std::size_t f = 0; f < r.cv.fold_r2.size(); ++f) folds += fmt::format("{}{}", f ? ";" : "", r.cv.fold_r2[f]);
        out << fmt::format("{},{},{},{},{},{},{}\n", i + 1, r.grid_index, hidden_label(r.cell.hidden),
                           r.cell.learning_rate, nn::to_string(r.cell.activation), r.cv.mean_r2, folds);
      }
      if (!out) throw IoError(gs_out, "write failed");
      fmt::print("best: {} lr={} {} mean R2={:.5f}\n", results.front().cell.label(), results.front().cell.learning_rate,
                 nn::to_string(results.front().cell.activation), results.front().cv.mean_r2);
    } else if (*train) {
      const TransitionDataset ds = load_dataset_csv(ts_data);
      const SurrogateModel model = fit_surrogate(ds, nullptr, ts_seed);
      write_json(ts_out, to_json(model));
      fmt::print("validation R2={:.5f} after {} epochs on {} rows\n", model.r2, model.epochs, model.samples);
    } else if (*run) {
      TrialConfig cfg = run_overrides.apply({});
      cfg.mode = parse_mode(run_mode);
      cfg.env.profile = fault_profile(run_fault);
      cfg.seed = run_seed;
      std::optional<SurrogateModel> pretrained;
      if (!run_model.empty()) {
        try {
          pretrained = surrogate_from_json(read_json(run_model));
        } catch (const nlohmann::json::exception& e) {
          throw IoError(run_model, e.what());
        } catch (const std::invalid_argument& e) {
          throw IoError(run_model, e.what());
        }
      }
      const TrialResult result = run_control_loop(cfg, pretrained ? &*pretrained : nullptr);
      const ExportedFiles files = export_csv(result, run_out);
      fmt::print("{}: final interval mean reward {:.4f}; wrote {} and {}\n", run_mode,
                 result.intervals.back().mean_reward, files.steps.string(), files.intervals.string());
    } else if (*aggregate) {
      std::vector<ControlMode> modes;
      for (const std::string& m : ag_modes) modes.push_back(parse_mode(m));
      if (modes.empty()) modes.assign(kAllModes.begin(), kAllModes.end());
      const AggregateResult agg = run_aggregate(ag_trials, ag_seed, ag_overrides.apply({}), modes);
      export_aggregate_csv(agg, ag_out);
      std::string line;
      for (std::size_t m = 0; m < modes.size(); ++m) {
        line += fmt::format("{}{}={:.4f}", m ? " " : "", mode_name(modes[m]), agg.mean_reward.back()[m]);
      }
      fmt::print("final interval mean reward: {}\n", line);
    } else if (*plot) {
      for (const fs::path& p : emit_plots(pl_in, pl_out)) fmt::print("wrote {}\n", p.string());
    }
  } catch (const IoError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
