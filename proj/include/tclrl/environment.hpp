#pragma once

// Day-by-day simulators for the two devices as seen by a controller: the
// agent-facing observation, the backup-filtered action and the hidden state.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tclrl/building.hpp"
#include "tclrl/exogenous.hpp"
#include "tclrl/fqi.hpp"
#include "tclrl/tank.hpp"

namespace tclrl {

/// Where exogenous data comes from. Empty paths select the synthetic generators.
struct DataConfig {
  std::uint64_t seed = 7;  // weather and prices; shared by every run seed
  std::filesystem::path weather_csv;
  std::filesystem::path price_csv;
  std::filesystem::path tap_csv;
  WeatherSynthParams weather;
  PriceSynthParams price;
  TapSynthParams tap;
  double forecast_noise_std = 0.0;  // degC, added to the outside-temperature forecast
};

/// Resolves exogenous days. Tap draws follow the run seed; weather and prices
/// follow the data seed. CSV files are read once and shared between copies.
class ExogenousSource {
 public:
  ExogenousSource(DataConfig cfg, std::uint64_t run_seed, double mean_daily_draw_l);

  ExogenousDay day(int d) const;
  const DataConfig& config() const { return cfg_; }
  std::uint64_t run_seed() const { return run_seed_; }

 private:
  DataConfig cfg_;
  std::uint64_t run_seed_;
  double mean_daily_draw_l_;
  std::shared_ptr<const std::vector<Eigen::VectorXd>> weather_;
  std::shared_ptr<const std::vector<PriceProfile>> prices_;
  std::shared_ptr<const std::vector<std::vector<DrawEvent>>> taps_;
};

struct SlotOutcome {
  double u_phys = 0.0;
  double price = 0.0;
  Eigen::VectorXd o_next;  // observation at the end of the slot
  double comfort_violation_min = 0.0;
  double metric = 0.0;     // air temperature (building) or state of charge (tank) at slot end
};

class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string scenario() const = 0;
  virtual Eigen::Index obs_dim() const = 0;
  virtual Eigen::Index exo_dim() const = 0;
  virtual Eigen::Index full_dim() const = 0;
  virtual double p_rated_kw() const = 0;
  virtual std::unique_ptr<Environment> clone() const = 0;

  /// Loads day `d`'s exogenous data and resets the clock to quarter 1. The
  /// physical state carries over from the previous day.
  void begin_day(int d);
  TimeSlot now() const { return now_; }
  const ExogenousDay& today() const { return today_; }
  const ExogenousSource& source() const { return source_; }

  virtual Eigen::VectorXd exo_now() const = 0;
  virtual Eigen::VectorXd full_state() const = 0;
  /// Applies the backup controller to `u`, advances one slot.
  virtual SlotOutcome step(Action u) = 0;

  /// Perfect-foresight exogenous forecast for day `d`, plus configured noise.
  virtual Forecast forecast(int d) const = 0;

 protected:
  explicit Environment(ExogenousSource source) : source_(std::move(source)) {}
  void advance() { now_ = now_.next(); }
  virtual void on_begin_day() {}

  ExogenousSource source_;
  ExogenousDay today_;
  int loaded_day_ = -1;
  TimeSlot now_;
};

class HeatPumpEnv final : public Environment {
 public:
  HeatPumpEnv(BuildingParams p, ExogenousSource source, BuildingState initial = {});

  std::string scenario() const override { return "heatpump"; }
  Eigen::Index obs_dim() const override { return 0; }
  Eigen::Index exo_dim() const override { return 1; }
  Eigen::Index full_dim() const override { return 2; }
  double p_rated_kw() const override { return p_.p_rated_kw; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<HeatPumpEnv>(*this); }

  Eigen::VectorXd exo_now() const override;
  Eigen::VectorXd full_state() const override;
  SlotOutcome step(Action u) override;
  Forecast forecast(int d) const override;

  const BuildingState& state() const { return s_; }
  const BuildingParams& params() const { return p_; }

 private:
  void on_begin_day() override;

  BuildingParams p_;
  BuildingState s_;
  std::mt19937_64 disturbance_;
};

class BoilerEnv final : public Environment {
 public:
  BoilerEnv(TankParams p, ExogenousSource source, double initial_temperature = 55.0);

  std::string scenario() const override { return "boiler"; }
  Eigen::Index obs_dim() const override { return 2; }
  Eigen::Index exo_dim() const override { return 0; }
  Eigen::Index full_dim() const override { return p_.layers; }
  double p_rated_kw() const override { return p_.p_rated_kw; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<BoilerEnv>(*this); }

  Eigen::VectorXd exo_now() const override { return Eigen::VectorXd(0); }
  Eigen::VectorXd full_state() const override { return s_.t; }
  SlotOutcome step(Action u) override;
  Forecast forecast(int d) const override;

  const TankState& state() const { return s_; }
  const TankParams& params() const { return p_; }
  /// Minimum thermostat reading over the last slot, its starting state included.
  double last_min_sensor() const { return last_min_sensor_; }

 private:
  void on_begin_day() override;

  TankParams p_;
  TankState s_;
  Eigen::VectorXd draws_;
  double last_min_sensor_ = 0.0;
};

}  // namespace tclrl
