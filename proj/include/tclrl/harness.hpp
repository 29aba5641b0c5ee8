#pragma once

// Experiment protocol: one simulated day per episode, epsilon-greedy action
// selection, a fitted-Q policy refreshed every evening on the growing batch,
// and the two reference controllers used to scale the agent's cost.

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "tclrl/environment.hpp"
#include "tclrl/fqi.hpp"
#include "tclrl/regressor.hpp"

namespace tclrl {

/// Approximator defaults with the LSTM cell size left to the scenario (0 = 8 heat pump, 12 boiler).
inline ApproxConfig scenario_approx_defaults() {
  ApproxConfig a;
  a.lstm_cell = 0;
  return a;
}

struct ScenarioConfig {
  std::string scenario = "heatpump";  // heatpump | boiler
  int days = 20;
  int history = 0;                    // 0 = scenario default (20 heat pump, 40 boiler)
  std::vector<std::uint64_t> seeds{1, 2, 3};
  ApproxConfig approx = scenario_approx_defaults();
  std::string full_state_approx = "trees";
  FqiConfig fqi;
  BuildingParams building;
  BuildingState building_initial{21.0, 21.0};
  TankParams tank;
  double tank_initial_c = 55.0;
  DataConfig data;
  bool baselines = true;

  /// Throws std::invalid_argument naming the offending key.
  void validate() const;
  int resolved_history() const;
  ApproxConfig resolved_approx(std::uint64_t seed) const;
};

std::unique_ptr<Environment> make_environment(const ScenarioConfig& cfg, std::uint64_t seed);

struct DayLog {
  int day = 0;
  double epsilon = 1.0;
  double cost_eur = 0.0;
  double comfort_violation_min = 0.0;
  std::vector<Action> u;
  std::vector<double> u_phys;
  std::vector<double> price;
  std::vector<double> metric;  // air temperature or state of charge at slot end
};

struct ExperimentRun {
  std::string label;  // approximator kind, "nocontrol" or "fullstate"
  std::uint64_t seed = 0;
  std::vector<DayLog> days;
  bool failed = false;
  std::string error;

  std::vector<double> daily_costs() const;
  std::vector<double> cumulative_costs() const;
};

/// Prefers Off everywhere; with epsilon 0 it reproduces the backup-only controller.
class AlwaysOff final : public QFunction {
 public:
  bool trained() const override { return true; }
  double predict(const AugmentedState&, Action u) const override { return as_double(u); }
};

/// Simulates day `day` (96 slots). With probability `epsilon` a slot's request
/// is a fair coin flip, otherwise greedy in `q` (which may only be null when
/// epsilon is 1). `history` is the agent's record buffer and is updated in
/// place; logged tuples are appended to `raw` when it is non-null.
DayLog run_day(Environment& env, int day, HistoryBuffer& history, int h, const QFunction* q, double epsilon,
               std::mt19937_64& rng, std::vector<RawTransition>* raw, int episode = 0);

/// Learning run of the partial-observation agent with the configured approximator.
ExperimentRun run_experiment(const ScenarioConfig& cfg, std::uint64_t seed);

/// Same protocol with the simulator state as the regressor input.
ExperimentRun baseline_full_state(const ScenarioConfig& cfg, std::uint64_t seed);

/// Backup controller alone.
ExperimentRun baseline_no_control(const ScenarioConfig& cfg, std::uint64_t seed);

/// Greedy, non-learning evaluation of a trained model on days [first_day, first_day + n_days).
ExperimentRun evaluate_frozen(const ScenarioConfig& cfg, std::uint64_t seed, const QModel& model, int first_day,
                              int n_days);

struct Band {
  std::vector<double> mean, lo, hi;
};

/// Per-day mean and mean +/- 2 sample standard deviations across runs.
Band aggregate_seeds(const std::vector<std::vector<double>>& runs);

}  // namespace tclrl
