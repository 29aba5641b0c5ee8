#pragma once

// Exogenous inputs: outside temperature, day-ahead prices and tap-water draws.
// Synthetic generators are pure functions of (seed, day).

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "tclrl/mdp.hpp"

namespace tclrl {

struct DrawEvent {
  int quarter = 1;
  double liters = 0.0;
  friend bool operator==(const DrawEvent&, const DrawEvent&) = default;
};

struct ExogenousDay {
  Eigen::VectorXd t_out;          // 96 values, degC (building scenario)
  std::vector<DrawEvent> draws;   // tank scenario
  PriceProfile lambda;

  /// Litres drawn in each quarter.
  Eigen::VectorXd draw_per_slot() const;
};

/// Deterministic generator stream for a (seed, day, purpose) triple.
std::mt19937_64 day_rng(std::uint64_t seed, int day, std::uint64_t stream);

struct WeatherSynthParams {
  double mean_c = 5.0;           // seasonal mean
  double day_offset_std = 2.0;   // day-to-day shift of the daily mean
  double amplitude_c = 4.0;      // half peak-to-peak of the daily sinusoid
  double min_hour = 5.0;         // hour of the daily minimum
  double ar_phi = 0.95;          // AR(1) coefficient per slot
  double noise_std = 0.3;        // stationary std of the AR(1) component
};

/// 96 quarter-hourly outside temperatures: mean + offset - A cos(2 pi (t - t_min) / 24) + AR(1).
Eigen::VectorXd synth_weather(int day, std::uint64_t seed, const WeatherSynthParams& p);

/// Reads `timestamp,temp_c` and resamples to quarters. Each reading holds until the
/// next one (at most the file's native spacing); quarters with several readings are
/// averaged; gaps of up to 4 quarters are interpolated linearly.
std::vector<Eigen::VectorXd> load_weather_csv(const std::filesystem::path& path);

struct PriceSynthParams {
  double base = 0.04;             // EUR/kWh
  double morning_peak = 0.04;
  double morning_hour = 8.0;
  double evening_peak = 0.07;
  double evening_hour = 19.0;
  double peak_width_h = 1.5;      // Gaussian std of each bump
  double night_dip = 0.015;       // subtracted around 03:00
  double day_level_std = 0.004;   // per-day shift of the whole profile
  double noise_std = 0.003;       // per-slot noise
};

PriceProfile synth_price(int day, std::uint64_t seed, const PriceSynthParams& p);

/// Reads `day,quarter,price_eur_per_kwh`; every listed day needs all 96 quarters.
std::vector<PriceProfile> load_price_csv(const std::filesystem::path& path);
void write_price_csv(const std::filesystem::path& path, const std::vector<PriceProfile>& days);

struct TapSynthParams {
  double intensity_scale = 1.0;
  double small_min_l = 1.0;
  double small_max_l = 5.0;
  double shower_min_l = 30.0;
  double shower_max_l = 60.0;
  double shower_share = 0.55;     // fraction of the daily volume drawn by showers
  double morning_hour = 7.0;
  double evening_hour = 20.0;
  double peak_width_h = 1.5;
  double base_intensity = 0.3;    // relative to the peak bumps
};

/// Poisson tap draws with a morning/evening intensity. Expected daily volume is
/// mean_daily_l * intensity_scale.
std::vector<DrawEvent> tap_profile(int day, std::uint64_t seed, double mean_daily_l, const TapSynthParams& p);

/// Relative arrival intensity per quarter, normalised to sum to one.
Eigen::VectorXd tap_intensity(const TapSynthParams& p);

/// Reads `day,quarter,liters` into per-day event lists (days without rows are empty).
std::vector<std::vector<DrawEvent>> load_tap_csv(const std::filesystem::path& path);

}  // namespace tclrl
