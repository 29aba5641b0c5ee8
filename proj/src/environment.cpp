#include "tclrl/environment.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace tclrl {

namespace {
constexpr std::uint64_t kDisturbanceStream = 4;
constexpr std::uint64_t kForecastStream = 5;

template <typename T>
const T& day_or_throw(const std::vector<T>& v, int d, const std::filesystem::path& file) {
  if (d < 0 || static_cast<std::size_t>(d) >= v.size())
    throw std::runtime_error(file.string() + ": no data for day " + std::to_string(d) + " (file covers " +
                             std::to_string(v.size()) + " days)");
  return v[static_cast<std::size_t>(d)];
}
}  // namespace

ExogenousSource::ExogenousSource(DataConfig cfg, std::uint64_t run_seed, double mean_daily_draw_l)
    : cfg_(std::move(cfg)), run_seed_(run_seed), mean_daily_draw_l_(mean_daily_draw_l) {
  if (!cfg_.weather_csv.empty())
    weather_ = std::make_shared<const std::vector<Eigen::VectorXd>>(load_weather_csv(cfg_.weather_csv));
  if (!cfg_.price_csv.empty())
    prices_ = std::make_shared<const std::vector<PriceProfile>>(load_price_csv(cfg_.price_csv));
  if (!cfg_.tap_csv.empty())
    taps_ = std::make_shared<const std::vector<std::vector<DrawEvent>>>(load_tap_csv(cfg_.tap_csv));
}

ExogenousDay ExogenousSource::day(int d) const {
  if (d < 0) throw std::invalid_argument("ExogenousSource: negative day");
  ExogenousDay out;
  out.t_out = weather_ ? day_or_throw(*weather_, d, cfg_.weather_csv) : synth_weather(d, cfg_.seed, cfg_.weather);
  out.lambda = prices_ ? day_or_throw(*prices_, d, cfg_.price_csv) : synth_price(d, cfg_.seed, cfg_.price);
  if (taps_)
    out.draws = static_cast<std::size_t>(d) < taps_->size() ? (*taps_)[static_cast<std::size_t>(d)]
                                                             : std::vector<DrawEvent>{};
  else
    out.draws = tap_profile(d, run_seed_, mean_daily_draw_l_, cfg_.tap);
  return out;
}

void Environment::begin_day(int d) {
  today_ = source_.day(d);
  now_ = TimeSlot(1, d);
  loaded_day_ = d;
  on_begin_day();
}

HeatPumpEnv::HeatPumpEnv(BuildingParams p, ExogenousSource source, BuildingState initial)
    : Environment(std::move(source)), p_(p), s_(initial) {
  p_.validate();
}

void HeatPumpEnv::on_begin_day() { disturbance_ = day_rng(source_.run_seed(), now_.day, kDisturbanceStream); }

Eigen::VectorXd HeatPumpEnv::exo_now() const {
  // After the last slot the clock already points at the next day.
  if (now_.day != loaded_day_) return Eigen::VectorXd::Constant(1, source_.day(now_.day).t_out(0));
  return Eigen::VectorXd::Constant(1, today_.t_out(now_.quarter - 1));
}

Eigen::VectorXd HeatPumpEnv::full_state() const { return Eigen::Vector2d(s_.t_air, s_.t_mass); }

SlotOutcome HeatPumpEnv::step(Action u) {
  SlotOutcome out;
  out.u_phys = thermostat_building(s_, u, p_).value();
  out.price = today_.lambda.at(now_.quarter);
  std::normal_distribution<double> noise(0.0, p_.sigma_w);
  const double w = p_.sigma_w > 0 ? noise(disturbance_) : 0.0;
  s_ = building_step(s_, out.u_phys, today_.t_out(now_.quarter - 1), w, p_);
  out.o_next = Eigen::VectorXd(0);
  out.comfort_violation_min = (s_.t_air < p_.t_min || s_.t_air > p_.t_max) ? p_.dt_ctrl / 60.0 : 0.0;
  out.metric = s_.t_air;
  advance();
  return out;
}

Forecast HeatPumpEnv::forecast(int d) const {
  Forecast f;
  f.x_exo = source_.day(d).t_out;
  const double sd = source_.config().forecast_noise_std;
  if (sd > 0) {
    auto rng = day_rng(source_.run_seed(), d, kForecastStream);
    std::normal_distribution<double> noise(0.0, sd);
    for (Eigen::Index i = 0; i < f.x_exo.rows(); ++i) f.x_exo(i, 0) += noise(rng);
  }
  return f;
}

BoilerEnv::BoilerEnv(TankParams p, ExogenousSource source, double initial_temperature)
    : Environment(std::move(source)), p_(p), s_(TankState::uniform(p, initial_temperature)) {
  p_.validate();
}

void BoilerEnv::on_begin_day() { draws_ = today_.draw_per_slot(); }

SlotOutcome BoilerEnv::step(Action u) {
  const double draw = draws_(now_.quarter - 1);
  double min_sensor = tank_sensor(s_, p_);
  const double span = p_.heater_last - p_.heater_first + 1;
  const TankSlotResult r = tank_step_controlled(s_, u, draw, p_, [&](const Eigen::VectorXd& t) {
    min_sensor = std::min(min_sensor, t.segment(p_.heater_first - 1, static_cast<Eigen::Index>(span)).mean());
  });
  s_ = r.state;
  last_min_sensor_ = min_sensor;
  SlotOutcome out;
  out.u_phys = r.u_phys;
  out.price = today_.lambda.at(now_.quarter);
  out.o_next = tank_observe(s_, draw);
  out.comfort_violation_min = r.comfort_violation_s / 60.0;
  out.metric = tank_soc(s_, p_);
  advance();
  return out;
}

Forecast BoilerEnv::forecast(int) const { return Forecast{Eigen::MatrixXd(kSlotsPerDay, 0)}; }

}  // namespace tclrl
