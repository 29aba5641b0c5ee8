#pragma once

// CSV emission for experiment runs and the tidy plot-data aggregation.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tclrl/harness.hpp"

namespace tclrl {

/// Runs to report plus the per-seed references used for scaled cost and policy distance.
struct ResultSet {
  std::string scenario;
  std::uint64_t hash = 0;
  std::vector<ExperimentRun> runs;
  std::map<std::uint64_t, ExperimentRun> nocontrol;
  std::map<std::uint64_t, ExperimentRun> fullstate;
};

std::string run_id(const std::string& scenario, const std::string& label, std::uint64_t seed);

/// Shortest decimal that round-trips; "nan"/"inf" spelled out.
std::string fmt(double v);

std::string daily_csv(const ResultSet& rs);
std::string slots_csv(const ResultSet& rs);

struct SummaryRow {
  std::string label;
  std::size_t seeds = 0;
  int window_days = 0;
  double mean_daily_cost = 0.0;  // final window, mean over seeds
  double lo = 0.0, hi = 0.0;     // +/- 2 sample std across seeds
  double final_cumulative_cost = 0.0;
  std::optional<double> scaled_cost;
  std::optional<double> reduction_vs_nocontrol;
  std::optional<double> policy_distance;
  double comfort_violation_min = 0.0;  // final window, mean per day
};

/// Per label: final-window statistics. Runs that failed are excluded.
std::vector<SummaryRow> summarize(const ResultSet& rs, int window_days = 10);
std::string summary_csv(const ResultSet& rs, int window_days = 10);

/// Writes through a temporary file in the same directory, then renames.
void write_atomic(const std::filesystem::path& path, const std::string& text);

/// Collects every daily.csv below `dir` and emits long-format rows
/// (config_hash, series, metric, day, value, lo, hi). Throws on an empty
/// directory or on files with different config hashes.
std::string plot_data(const std::filesystem::path& dir);

}  // namespace tclrl
