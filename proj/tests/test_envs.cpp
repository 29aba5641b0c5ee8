#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "tclrl/building.hpp"
#include "tclrl/exogenous.hpp"
#include "tclrl/tank.hpp"

using namespace tclrl;

namespace {

// Reference integrator written out scalar by scalar.
BuildingState euler_oracle(double ta, double tm, double t_out, double u, const BuildingParams& p) {
  const int n = static_cast<int>(p.dt_ctrl / p.dt_sim);
  for (int i = 0; i < n; ++i) {
    const double q_hp = u * p.p_rated_kw * p.cop * 1000.0;
    const double dta = (p.ua_air * (t_out - ta) + p.h_mass * (tm - ta) + q_hp) / p.c_air;
    const double dtm = p.h_mass * (ta - tm) / p.c_mass;
    ta += p.dt_sim * dta;
    tm += p.dt_sim * dtm;
  }
  return {ta, tm};
}

struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const std::string& name, const std::string& text)
      : path(std::filesystem::temp_directory_path() / ("tclrl_test_" + name)) {
    std::ofstream(path) << text;
  }
  ~TempFile() { std::filesystem::remove(path); }
};

bool monotone(const Eigen::VectorXd& t) {
  for (Eigen::Index i = 0; i + 1 < t.size(); ++i)
    if (t(i) > t(i + 1)) return false;
  return true;
}

int parse_error_line(const std::function<void()>& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("building equilibrium is a fixed point") {
  BuildingParams p;
  for (double t : {-5.0, 0.0, 12.5, 21.0}) {
    const BuildingState s = building_step({t, t}, 0.0, t, 0.0, p);
    CHECK(std::abs(s.t_air - t) <= 1e-12);
    CHECK(std::abs(s.t_mass - t) <= 1e-12);
  }
}

TEST_CASE("building step matches an independent Euler integrator") {
  BuildingParams p;
  const BuildingState s = building_step({20.0, 20.0}, 1.0, 0.0, 0.0, p);
  const BuildingState ref = euler_oracle(20.0, 20.0, 0.0, 1.0, p);
  CHECK(std::abs(s.t_air - ref.t_air) < 1e-9);
  CHECK(std::abs(s.t_mass - ref.t_mass) < 1e-9);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> temp(-10.0, 30.0), duty(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const double ta = temp(rng), tm = temp(rng), to = temp(rng), u = duty(rng);
    const BuildingState a = building_step({ta, tm}, u, to, 0.0, p);
    const BuildingState b = euler_oracle(ta, tm, to, u, p);
    CHECK(std::abs(a.t_air - b.t_air) < 1e-9);
    CHECK(std::abs(a.t_mass - b.t_mass) < 1e-9);
  }
}

TEST_CASE("building disturbance is added once to the air node") {
  BuildingParams p;
  const BuildingState a = building_step({21.0, 20.0}, 0.3, 5.0, 0.0, p);
  const BuildingState b = building_step({21.0, 20.0}, 0.3, 5.0, 0.125, p);
  CHECK(b.t_air - a.t_air == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(b.t_mass == a.t_mass);
}

TEST_CASE("building cools without heating when it is colder outside") {
  BuildingParams p;
  const BuildingState s = building_step({21.0, 21.0}, 0.0, 5.0, 0.0, p);
  CHECK(s.t_air < 21.0);
}

TEST_CASE("building energy sanity with no conductances") {
  BuildingParams p;
  p.ua_air = 0.0;
  p.h_mass = 0.0;
  const BuildingState s = building_step({20.0, 20.0}, 1.0, -10.0, 0.0, p);
  const double expected = p.p_rated_kw * 1000.0 * p.cop * p.dt_ctrl / p.c_air;
  CHECK(s.t_air - 20.0 == doctest::Approx(expected).epsilon(1e-12));
  CHECK(s.t_mass == 20.0);
}

TEST_CASE("building thermostat") {
  BuildingParams p;
  CHECK(thermostat_building({19.5, 20.0}, Action::Off, p).value() == 1.0);
  CHECK(thermostat_building({23.5, 20.0}, Action::On, p).value() == 0.0);
  CHECK(thermostat_building({21.5, 20.0}, Action::On, p).value() == 1.0);
  CHECK(thermostat_building({21.5, 20.0}, Action::Off, p).value() == 0.0);
}

TEST_CASE("building parameters are validated") {
  BuildingParams p;
  p.dt_sim = 70.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = BuildingParams{};
  p.c_air = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = BuildingParams{};
  p.t_min = 24.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("building backup keeps the air within one degree of the band") {
  // Random requested actions for a week of synthetic weather; an excursion
  // beyond [t_min - 1, t_max + 1] may last at most one slot.
  BuildingParams p;
  std::mt19937_64 rng(11);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> noise(0.0, p.sigma_w);
  for (double mean : {-5.0, 5.0, 15.0}) {
    WeatherSynthParams wp;
    wp.mean_c = mean;
    BuildingState s{21.0, 21.0};
    int run = 0, worst = 0;
    for (int d = 0; d < 7; ++d) {
      const Eigen::VectorXd t_out = synth_weather(d, 5, wp);
      for (int q = 0; q < kSlotsPerDay; ++q) {
        const double u = thermostat_building(s, coin(rng) ? Action::On : Action::Off, p).value();
        s = building_step(s, u, t_out(q), noise(rng), p);
        const bool out = s.t_air < p.t_min - 1.0 || s.t_air > p.t_max + 1.0;
        run = out ? run + 1 : 0;
        worst = std::max(worst, run);
      }
    }
    CHECK(worst <= 1);
  }
}

TEST_CASE("tank without fluxes is unchanged") {
  TankParams p;
  p.ua_loss = 0.0;
  TankState s = TankState::uniform(p, 40.0);
  for (int i = 0; i < p.layers; ++i) s.t(i) = 20.0 + 0.5 * i;
  const TankState r = tank_step(s, 0.0, 0.0, p);
  CHECK(r.t == s.t);
}

TEST_CASE("tank heater deposits exactly its rated energy over a slot") {
  TankParams p;
  p.ua_loss = 0.0;
  const TankState s = TankState::uniform(p, 50.0);
  const TankState r = tank_step(s, 1.0, 0.0, p);
  const double gained = tank_enthalpy(r, p) - tank_enthalpy(s, p);
  const double expected = 2.3 * 1000.0 * 0.25 * 3600.0;
  INFO("error " << gained - expected);
  CHECK(gained == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("tank draw removes the outlet enthalpy and cools the bottom") {
  TankParams p;
  p.ua_loss = 0.0;
  const TankState s = TankState::uniform(p, 60.0);
  const TankState r = tank_step(s, 0.0, 10.0, p);
  // Oracle: 10 L leave at 60 degC and are replaced by 10 L at the inlet temperature.
  const double removed = 10.0 * kWaterDensity * kWaterHeatCapacity * (60.0 - 10.0);
  const double change = tank_enthalpy(s, p) - tank_enthalpy(r, p);
  CHECK(std::abs(change - removed) / removed < 1e-6);
  CHECK(r.t(0) < 60.0);
  CHECK(r.t(0) >= p.t_inlet);
  CHECK(r.t(p.layers - 1) == doctest::Approx(60.0).epsilon(1e-12));
  CHECK(monotone(r.t));
}

TEST_CASE("tank enthalpy balance under heating and draws") {
  TankParams p;
  p.ua_loss = 0.0;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> draw(0.0, 60.0);
  TankState s = TankState::uniform(p, 55.0);
  for (int k = 0; k < 40; ++k) {
    const Action u = k % 3 == 0 ? Action::Off : Action::On;
    const TankSlotResult r = tank_step_controlled(s, u, draw(rng), p);
    const double change = tank_enthalpy(r.state, p) - tank_enthalpy(s, p);
    const double expected = r.heat_in_j - r.draw_enthalpy_j;
    CHECK(std::abs(change - expected) <= 1e-6 * std::max(std::abs(expected), 1.0));
    s = r.state;
  }
}

TEST_CASE("tank stays stratified after every substep of a day") {
  TankParams p;
  const std::vector<DrawEvent> draws = tap_profile(0, 9, p.mean_daily_draw_l, TapSynthParams{});
  ExogenousDay day;
  day.draws = draws;
  const Eigen::VectorXd per_slot = day.draw_per_slot();
  TankState s = TankState::uniform(p, 55.0);
  long substeps = 0, violations = 0;
  const SubstepObserver obs = [&](const Eigen::VectorXd& t) {
    ++substeps;
    if (!monotone(t)) ++violations;
  };
  for (int q = 0; q < kSlotsPerDay; ++q)
    s = tank_step_controlled(s, q % 2 ? Action::On : Action::Off, per_slot(q), p, obs).state;
  CHECK(substeps == 96L * p.substeps());
  CHECK(violations == 0);
}

TEST_CASE("tank buoyancy mixing merges inversions into their mean") {
  Eigen::VectorXd t(4);
  t << 30.0, 20.0, 25.0, 40.0;
  buoyancy_mix(t);
  CHECK(t(0) == doctest::Approx(25.0));
  CHECK(t(1) == doctest::Approx(25.0));
  CHECK(t(2) == doctest::Approx(25.0));
  CHECK(t(3) == 40.0);
  Eigen::VectorXd top(3);
  top << 10.0, 50.0, 20.0;
  buoyancy_mix(top);
  CHECK(top(0) == 10.0);
  CHECK(top(1) == doctest::Approx(35.0));
  CHECK(top(2) == doctest::Approx(35.0));
}

TEST_CASE("tank rejects impossible draws") {
  TankParams p;
  TankState s = TankState::uniform(p, 55.0);
  CHECK_THROWS_AS(tank_step(s, 0.0, -1.0, p), std::invalid_argument);
  CHECK_THROWS_AS(tank_step(s, 0.0, 180.0 * 200.0 + 1.0, p), std::invalid_argument);
}

TEST_CASE("tank thermostat reads the heater span") {
  TankParams p;
  CHECK(thermostat_tank(TankState::uniform(p, 44.0), Action::Off, p).value() == 1.0);
  CHECK(thermostat_tank(TankState::uniform(p, 66.0), Action::On, p).value() == 0.0);
  CHECK(thermostat_tank(TankState::uniform(p, 55.0), Action::Off, p).value() == 0.0);
  CHECK(thermostat_tank(TankState::uniform(p, 55.0), Action::On, p).value() == 1.0);
  TankState s = TankState::uniform(p, 70.0);
  s.t.head(10).setConstant(44.0);
  CHECK(tank_sensor(s, p) == 44.0);
  CHECK(thermostat_tank(s, Action::Off, p).value() == 1.0);
}

TEST_CASE("tank observation and mixing valve") {
  TankParams p;
  TankState s = TankState::uniform(p, 60.0);
  const Eigen::VectorXd none = tank_observe(s, 0.0);
  CHECK(none(0) == 0.0);
  CHECK(none(1) == 60.0);
  const Eigen::VectorXd ten = tank_observe(s, 10.0);
  CHECK(ten(0) == 10.0);
  CHECK(ten(1) == 60.0);
  CHECK(delivered_temperature(s, p) == 45.0);
  s.t(p.layers - 1) = 41.0;
  CHECK(delivered_temperature(s, p) == 41.0);
}

TEST_CASE("tank state of charge") {
  TankParams p;
  CHECK(tank_soc(TankState::uniform(p, p.t_min), p) == 0.0);
  CHECK(tank_soc(TankState::uniform(p, p.t_max), p) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(tank_soc(TankState::uniform(p, 55.0), p) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(tank_soc(TankState::uniform(p, 30.0), p) == 0.0);
  CHECK(tank_soc(TankState::uniform(p, 75.0), p) == doctest::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("weather csv: constant file, resampling and errors") {
  SUBCASE("constant 10 degC at 15 minutes") {
    std::string text = "timestamp,temp_c\n";
    for (int q = 0; q < 96; ++q) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "2024-01-01T%02d:%02d:00,10.0\n", q / 4, 15 * (q % 4));
      text += buf;
    }
    TempFile f("weather_const.csv", text);
    const auto days = load_weather_csv(f.path);
    REQUIRE(days.size() == 1);
    CHECK(days[0] == Eigen::VectorXd::Constant(96, 10.0));
  }
  SUBCASE("30-minute readings fill two quarters each") {
    std::string text = "timestamp,temp_c\n";
    for (int k = 0; k < 48; ++k) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "2024-01-01 %02d:%02d,%d\n", k / 2, 30 * (k % 2), k);
      text += buf;
    }
    TempFile f("weather_30.csv", text);
    const auto days = load_weather_csv(f.path);
    REQUIRE(days.size() == 1);
    for (int q = 0; q < 96; ++q) CHECK(days[0](q) == static_cast<double>(q / 2));
  }
  SUBCASE("short gaps are interpolated, long gaps rejected") {
    std::string ok = "timestamp,temp_c\n";
    std::string bad = "timestamp,temp_c\n";
    for (int q = 0; q < 96; ++q) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "2024-01-01T%02d:%02d,%d\n", q / 4, 15 * (q % 4), q);
      if (q < 10 || q > 13) ok += buf;
      if (q < 10 || q > 14) bad += buf;
    }
    TempFile a("weather_gap_ok.csv", ok);
    const auto days = load_weather_csv(a.path);
    for (int q = 10; q <= 13; ++q) CHECK(days[0](q) == doctest::Approx(static_cast<double>(q)));
    TempFile b("weather_gap_bad.csv", bad);
    CHECK_THROWS_AS(load_weather_csv(b.path), ParseError);
  }
  SUBCASE("malformed rows report their line") {
    TempFile f("weather_bad.csv", "timestamp,temp_c\n2024-01-01T00:00,1\n2024-01-01T00:15,abc\n");
    CHECK(parse_error_line([&] { load_weather_csv(f.path); }) == 3);
    TempFile g("weather_ts.csv", "timestamp,temp_c\n2024-01-01T00:00,1\nyesterday,2\n");
    CHECK(parse_error_line([&] { load_weather_csv(g.path); }) == 3);
    TempFile h("weather_hdr.csv", "time,temp\n");
    CHECK(parse_error_line([&] { load_weather_csv(h.path); }) == 1);
  }
  SUBCASE("missing file") { CHECK_THROWS(load_weather_csv("/nonexistent/weather.csv")); }
}

TEST_CASE("synthetic weather without noise is a sinusoid with its minimum at the configured hour") {
  WeatherSynthParams p;
  p.day_offset_std = 0.0;
  p.noise_std = 0.0;
  p.min_hour = 5.0;
  const Eigen::VectorXd t = synth_weather(3, 1, p);
  Eigen::Index argmin = 0;
  t.minCoeff(&argmin);
  CHECK(argmin == 20);
  CHECK(t(20) == doctest::Approx(p.mean_c - p.amplitude_c).epsilon(1e-12));
  CHECK(t(68) == doctest::Approx(p.mean_c + p.amplitude_c).epsilon(1e-12));
  CHECK(synth_weather(3, 1, WeatherSynthParams{}) == synth_weather(3, 1, WeatherSynthParams{}));
  CHECK(synth_weather(3, 1, WeatherSynthParams{}) != synth_weather(4, 1, WeatherSynthParams{}));
}

TEST_CASE("synthetic prices") {
  PriceSynthParams flat;
  flat.morning_peak = flat.evening_peak = flat.night_dip = 0.0;
  flat.day_level_std = flat.noise_std = 0.0;
  CHECK(synth_price(2, 5, flat).values() == Eigen::VectorXd::Constant(96, flat.base));
  const PriceProfile a = synth_price(2, 5, PriceSynthParams{});
  CHECK(a.values() == synth_price(2, 5, PriceSynthParams{}).values());
  CHECK(a.values() != synth_price(3, 5, PriceSynthParams{}).values());
  CHECK(a.values().allFinite());
}

TEST_CASE("price csv round trip and errors") {
  const std::vector<PriceProfile> days{synth_price(0, 1, {}), synth_price(1, 1, {})};
  const auto path = std::filesystem::temp_directory_path() / "tclrl_test_prices.csv";
  write_price_csv(path, days);
  const auto back = load_price_csv(path);
  std::filesystem::remove(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].values() == days[0].values());
  CHECK(back[1].values() == days[1].values());

  std::string text = "day,quarter,price_eur_per_kwh\n";
  for (int q = 1; q <= 95; ++q) text += "0," + std::to_string(q) + ",0.05\n";
  TempFile f("prices_short.csv", text);
  CHECK_THROWS_AS(load_price_csv(f.path), ParseError);
  TempFile g("prices_bad.csv", "day,quarter,price_eur_per_kwh\n0,1,0.05\n0,2,x\n");
  CHECK(parse_error_line([&] { load_price_csv(g.path); }) == 3);
}

TEST_CASE("tap profile") {
  TapSynthParams p;
  SUBCASE("zero intensity draws nothing") {
    p.intensity_scale = 0.0;
    for (int d = 0; d < 20; ++d) CHECK(tap_profile(d, 4, 100.0, p).empty());
  }
  SUBCASE("deterministic per seed and day") {
    CHECK(tap_profile(5, 4, 100.0, p) == tap_profile(5, 4, 100.0, p));
    CHECK(tap_profile(5, 4, 100.0, p) != tap_profile(5, 5, 100.0, p));
  }
  SUBCASE("expected daily volume is 100 L") {
    double total = 0.0;
    const int n = 10000;
    for (int d = 0; d < n; ++d)
      for (const DrawEvent& e : tap_profile(d, 17, 100.0, p)) {
        CHECK_UNARY(e.liters >= 0.0);
        total += e.liters;
      }
    const double mean = total / n;
    CHECK(mean > 98.0);
    CHECK(mean < 102.0);
  }
  SUBCASE("intensity peaks in the morning and evening") {
    const Eigen::VectorXd w = tap_intensity(p);
    CHECK(w.sum() == doctest::Approx(1.0));
    CHECK(w(28) > w(12));
    CHECK(w(80) > w(56));
  }
}

TEST_CASE("tap csv") {
  TempFile f("taps.csv", "day,quarter,liters\n0,30,40\n2,81,5.5\n");
  const auto days = load_tap_csv(f.path);
  REQUIRE(days.size() == 3);
  CHECK(days[0] == std::vector<DrawEvent>{{30, 40.0}});
  CHECK(days[1].empty());
  CHECK(days[2] == std::vector<DrawEvent>{{81, 5.5}});
  TempFile g("taps_bad.csv", "day,quarter,liters\n0,30,40\n0,97,1\n");
  CHECK(parse_error_line([&] { load_tap_csv(g.path); }) == 3);
  TempFile h("taps_neg.csv", "day,quarter,liters\n0,30,-4\n");
  CHECK(parse_error_line([&] { load_tap_csv(h.path); }) == 2);
}
