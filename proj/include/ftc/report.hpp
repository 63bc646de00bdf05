#pragma once

// CSV export/import of trial results and SVG line charts of interval
// rewards and per-episode tank levels.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "ftc/errors.hpp"
#include "ftc/harness.hpp"

namespace ftc {

inline constexpr std::string_view kStepLogHeader =
    "t,interval,episode,x1,x2,x3,x4,x5,x6,u1,u2,u3,u4,u5,u6,r_cg,r_var,r_u,reward,done";
inline constexpr std::string_view kIntervalHeader =
    "interval,mode,mean_reward,mean_r_cg,mean_r_var,mean_r_u,episodes,surrogate_r2";
inline constexpr std::string_view kFaultsHeader = "trial,valve,valve_factor,pump,pump_factor";

inline void write_step_log_csv(std::ostream& out, const std::vector<StepRecord>& steps) {
  out << kStepLogHeader << '\n';
  for (const StepRecord& s : steps) {
    std::string line = fmt::format("{},{},{}", s.t, s.interval, s.episode);
    for (double x : s.state.levels) line += fmt::format(",{}", x);
    for (bool u : s.action.open) line += u ? ",1" : ",0";
    line += fmt::format(",{},{},{},{},{}\n", s.reward.r_cg, s.reward.r_var, s.reward.r_u, s.reward.total,
                        s.done ? 1 : 0);
    out << line;
  }
}

inline void write_interval_csv(std::ostream& out, std::string_view mode,
                               const std::vector<IntervalMetrics>& metrics, bool header = true) {
  if (header) out << kIntervalHeader << '\n';
  for (const IntervalMetrics& m : metrics) {
    out << fmt::format("{},{},{},{},{},{},{},", m.interval, mode, m.mean_reward, m.mean_r_cg, m.mean_r_var,
                       m.mean_r_u, m.episodes);
    if (m.surrogate_r2) out << fmt::format("{}", *m.surrogate_r2);
    out << '\n';
  }
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) fields.push_back(f);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline double parse_double(const std::string& s, const std::filesystem::path& src, std::size_t row) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw IoError(src, fmt::format("row {}: bad number '{}'", row, s));
}

inline std::size_t parse_size(const std::string& s, const std::filesystem::path& src, std::size_t row) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used == s.size()) return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
  }
  throw IoError(src, fmt::format("row {}: bad integer '{}'", row, s));
}

// Reads the header (checked against `expected`) and yields each data row's fields.
template <class RowFn>
void read_csv(std::istream& in, std::string_view expected, std::size_t width, const std::filesystem::path& src,
              RowFn&& on_row) {
  std::string line;
  if (!std::getline(in, line)) throw IoError(src, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected) throw IoError(src, "unexpected header '" + line + "'");
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    const auto fields = split_csv_line(line);
    if (fields.size() != width) {
      throw IoError(src, fmt::format("row {}: expected {} fields, got {}", row, width, fields.size()));
    }
    on_row(fields, row);
  }
}

}  // namespace detail

struct IntervalRow {
  std::string mode;
  IntervalMetrics metrics;
};

inline std::vector<IntervalRow> read_interval_csv(std::istream& in, const std::filesystem::path& src = "<stream>") {
  std::vector<IntervalRow> rows;
  detail::read_csv(in, kIntervalHeader, 8, src, [&](const std::vector<std::string>& f, std::size_t r) {
    IntervalRow row;
    row.mode = f[1];
    row.metrics.interval = detail::parse_size(f[0], src, r);
    row.metrics.mean_reward = detail::parse_double(f[2], src, r);
    row.metrics.mean_r_cg = detail::parse_double(f[3], src, r);
    row.metrics.mean_r_var = detail::parse_double(f[4], src, r);
    row.metrics.mean_r_u = detail::parse_double(f[5], src, r);
    row.metrics.episodes = detail::parse_size(f[6], src, r);
    if (!f[7].empty()) row.metrics.surrogate_r2 = detail::parse_double(f[7], src, r);
    rows.push_back(row);
  });
  return rows;
}

inline std::vector<StepRecord> read_step_log_csv(std::istream& in, const std::filesystem::path& src = "<stream>") {
  std::vector<StepRecord> steps;
  detail::read_csv(in, kStepLogHeader, 20, src, [&](const std::vector<std::string>& f, std::size_t r) {
    StepRecord s;
    s.t = detail::parse_size(f[0], src, r);
    s.interval = detail::parse_size(f[1], src, r);
    s.episode = detail::parse_size(f[2], src, r);
    for (std::size_t i = 0; i < kTanks; ++i) {
      s.state.levels[i] = detail::parse_double(f[3 + i], src, r);
      s.action.open[i] = detail::parse_size(f[9 + i], src, r) != 0;
    }
    s.reward.r_cg = detail::parse_double(f[15], src, r);
    s.reward.r_var = detail::parse_double(f[16], src, r);
    s.reward.r_u = detail::parse_double(f[17], src, r);
    s.reward.total = detail::parse_double(f[18], src, r);
    s.done = detail::parse_size(f[19], src, r) != 0;
    steps.push_back(s);
  });
  return steps;
}

namespace detail {

template <class WriteFn>
void write_file(const std::filesystem::path& path, WriteFn&& write) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path, "cannot open for writing");
  write(out);
  out.flush();
  if (!out) throw IoError(path, "write failed");
}

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError(dir, "cannot create directory");
}

}  // namespace detail

struct ExportedFiles {
  std::filesystem::path steps;
  std::filesystem::path intervals;
};

/// Writes `<mode>_steps.csv` and `<mode>_intervals.csv` into `dir`.
inline ExportedFiles export_csv(const TrialResult& result, const std::filesystem::path& dir) {
  detail::ensure_directory(dir);
  const std::string mode(mode_name(result.config.mode));
  ExportedFiles files{dir / (mode + "_steps.csv"), dir / (mode + "_intervals.csv")};
  detail::write_file(files.steps, [&](std::ostream& o) { write_step_log_csv(o, result.steps); });
  detail::write_file(files.intervals, [&](std::ostream& o) { write_interval_csv(o, mode, result.intervals); });
  return files;
}

/// Writes `aggregate.csv` (mean reward per interval and mode),
/// `aggregate_intervals.csv` (every trial's interval metrics) and `faults.csv`.
inline void export_aggregate_csv(const AggregateResult& agg, const std::filesystem::path& dir) {
  detail::ensure_directory(dir);
  detail::write_file(dir / "aggregate.csv", [&](std::ostream& o) {
    o << "interval";
    for (ControlMode m : agg.modes) o << ',' << mode_name(m);
    o << '\n';
    for (std::size_t k = 0; k < agg.mean_reward.size(); ++k) {
      o << k;
      for (double v : agg.mean_reward[k]) o << fmt::format(",{}", v);
      o << '\n';
    }
  });
  detail::write_file(dir / "aggregate_intervals.csv", [&](std::ostream& o) {
    o << kIntervalHeader << '\n';
    for (const auto& runs : agg.per_trial) {
      for (std::size_t m = 0; m < agg.modes.size(); ++m) write_interval_csv(o, mode_name(agg.modes[m]), runs[m], false);
    }
  });
  detail::write_file(dir / "faults.csv", [&](std::ostream& o) {
    o << kFaultsHeader << '\n';
    for (std::size_t i = 0; i < agg.faults.size(); ++i) {
      const TrialFault& f = agg.faults[i];
      o << fmt::format("{},{},{},{},{}\n", i, f.valve + 1, f.valve_factor, f.pump + 1, f.pump_factor);
    }
  });
}

// ---------------------------------------------------------------------------
// SVG charts

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

namespace detail {

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline constexpr std::array<std::string_view, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

}  // namespace detail

inline std::string line_chart_svg(std::string_view title, std::string_view x_label, std::string_view y_label,
                                  const std::vector<Series>& series) {
  constexpr double W = 640, H = 400, L = 60, R = 150, T = 40, B = 50;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const Series& s : series) {
    for (double v : s.x) x0 = std::min(x0, v), x1 = std::max(x1, v);
    for (double v : s.y) y0 = std::min(y0, v), y1 = std::max(y1, v);
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double v) { return L + (v - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double v) { return H - B - (v - y0) / (y1 - y0) * (H - T - B); };

  std::string svg = fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n"
      "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n"
      "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
      W, H, W, H, W, H, (W - R + L) / 2, detail::xml_escape(title));
  svg += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n", L, H - B, W - R, H - B);
  svg += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n", L, T, L, H - B);
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0;
    const double yv = y0 + (y1 - y0) * i / 4.0;
    svg += fmt::format(
        "<text x=\"{:.1f}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{:.3g}</text>\n",
        px(xv), H - B + 16, xv);
    svg += fmt::format(
        "<text x=\"{}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{:.3g}</text>\n",
        L - 6, py(yv) + 4, yv);
  }
  svg += fmt::format(
      "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
      (W - R + L) / 2, H - 12, detail::xml_escape(x_label));
  svg += fmt::format(
      "<text x=\"16\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
      "transform=\"rotate(-90 16 {})\">{}</text>\n",
      (H - B + T) / 2, (H - B + T) / 2, detail::xml_escape(y_label));

  for (std::size_t i = 0; i < series.size(); ++i) {
    const Series& s = series[i];
    const auto color = detail::kPalette[i % detail::kPalette.size()];
    std::string points;
    for (std::size_t j = 0; j < std::min(s.x.size(), s.y.size()); ++j) {
      points += fmt::format("{}{:.2f},{:.2f}", j ? " " : "", px(s.x[j]), py(s.y[j]));
    }
    svg += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", color, points);
    const double ly = T + 16.0 * static_cast<double>(i);
    svg += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                       W - R + 10, ly, W - R + 30, ly, color);
    svg += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
                       W - R + 36, ly + 4, detail::xml_escape(s.name));
  }
  svg += "</svg>\n";
  return svg;
}

/// Tank levels over one episode; one series per tank, plus the fraction of
/// open valves.
inline std::string episode_levels_svg(std::string_view title, const std::vector<StepRecord>& episode) {
  std::vector<Series> series(kTanks + 1);
  for (std::size_t i = 0; i < kTanks; ++i) series[i].name = fmt::format("tank {}", i + 1);
  series[kTanks].name = "open valves";
  for (std::size_t j = 0; j < episode.size(); ++j) {
    for (std::size_t i = 0; i < kTanks; ++i) {
      series[i].x.push_back(static_cast<double>(j));
      series[i].y.push_back(episode[j].state.levels[i]);
    }
    series[kTanks].x.push_back(static_cast<double>(j));
    series[kTanks].y.push_back(episode[j].action.mean());
  }
  return line_chart_svg(title, "step", "level (m) / fraction open", series);
}

/// The last episode that ran to depletion, or the last episode if none did.
inline std::vector<StepRecord> last_episode(const std::vector<StepRecord>& steps) {
  if (steps.empty()) return {};
  std::size_t target = steps.back().episode;
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    if (it->done) {
      target = it->episode;
      break;
    }
  }
  std::vector<StepRecord> out;
  for (const StepRecord& s : steps) {
    if (s.episode == target) out.push_back(s);
  }
  return out;
}

/// Reads every `*_intervals.csv`, `*_steps.csv` and `aggregate.csv` in
/// `in_dir` and writes the corresponding charts into `out_dir`. Returns the
/// files written.
inline std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& in_dir,
                                                     const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(in_dir)) throw IoError(in_dir, "not a directory");
  detail::ensure_directory(out_dir);
  std::vector<fs::path> inputs;
  for (const auto& entry : fs::directory_iterator(in_dir)) {
    if (entry.is_regular_file()) inputs.push_back(entry.path());
  }
  std::sort(inputs.begin(), inputs.end());

  auto ends_with = [](const std::string& s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  auto open = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError(p, "cannot open for reading");
    return in;
  };

  std::vector<fs::path> written;
  std::map<std::string, Series> reward_series;
  for (const fs::path& p : inputs) {
    const std::string name = p.filename().string();
    if (ends_with(name, "_intervals.csv") && name != "aggregate_intervals.csv") {
      std::ifstream in = open(p);
      for (const IntervalRow& row : read_interval_csv(in, p)) {
        Series& s = reward_series[row.mode];
        s.name = row.mode;
        s.x.push_back(static_cast<double>(row.metrics.interval));
        s.y.push_back(row.metrics.mean_reward);
      }
    } else if (ends_with(name, "_steps.csv")) {
      std::ifstream in = open(p);
      const auto episode = last_episode(read_step_log_csv(in, p));
      const std::string stem = name.substr(0, name.size() - std::string_view("_steps.csv").size());
      const fs::path out = out_dir / (stem + "_levels.svg");
      const std::string title = episode.empty()
                                    ? stem + ": no steps"
                                    : fmt::format("{}: tank levels, interval {}", stem, episode.front().interval);
      detail::write_file(out, [&](std::ostream& o) { o << episode_levels_svg(title, episode); });
      written.push_back(out);
    } else if (name == "aggregate.csv") {
      std::ifstream in = open(p);
      std::string header;
      std::getline(in, header);
      const auto cols = detail::split_csv_line(header);
      if (cols.size() < 2 || cols[0] != "interval") throw IoError(p, "unexpected header '" + header + "'");
      std::vector<Series> series(cols.size() - 1);
      for (std::size_t i = 1; i < cols.size(); ++i) series[i - 1].name = cols[i];
      std::string line;
      std::size_t row = 0;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++row;
        const auto f = detail::split_csv_line(line);
        if (f.size() != cols.size()) throw IoError(p, fmt::format("row {}: wrong field count", row));
        for (std::size_t i = 1; i < f.size(); ++i) {
          series[i - 1].x.push_back(static_cast<double>(detail::parse_size(f[0], p, row)));
          series[i - 1].y.push_back(detail::parse_double(f[i], p, row));
        }
      }
      const fs::path out = out_dir / "aggregate.svg";
      detail::write_file(out, [&](std::ostream& o) {
        o << line_chart_svg("Mean reward per step (aggregate)", "interval", "mean reward", series);
      });
      written.push_back(out);
    }
  }
  if (!reward_series.empty()) {
    std::vector<Series> series;
    for (auto& [mode, s] : reward_series) series.push_back(std::move(s));
    const fs::path out = out_dir / "rewards.svg";
    detail::write_file(out, [&](std::ostream& o) {
      o << line_chart_svg("Mean reward per step by interval", "interval", "mean reward", series);
    });
    written.push_back(out);
  }
  return written;
}

}  // namespace ftc
