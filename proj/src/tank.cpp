#include "tclrl/tank.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace tclrl {

void TankParams::validate() const {
  if (!(volume_l > 0 && layers >= 2 && p_rated_kw > 0 && dt_sim > 0 && dt_ctrl > 0))
    throw std::invalid_argument("TankParams: volume, layers, power and time steps must be positive");
  if (!(t_min < t_max)) throw std::invalid_argument("TankParams: t_min must be below t_max");
  if (!(ua_loss >= 0)) throw std::invalid_argument("TankParams: ua_loss must be non-negative");
  if (heater_first < 1 || heater_last > layers || heater_first > heater_last)
    throw std::invalid_argument("TankParams: heater span must lie within the tank layers");
  const double ratio = dt_ctrl / dt_sim;
  if (std::abs(ratio - std::round(ratio)) > 1e-9)
    throw std::invalid_argument("TankParams: dt_ctrl must be an integer multiple of dt_sim");
}

int TankParams::substeps() const { return static_cast<int>(std::lround(dt_ctrl / dt_sim)); }

TankState TankState::uniform(const TankParams& p, double temperature) {
  return TankState{Eigen::VectorXd::Constant(p.layers, temperature)};
}

void buoyancy_mix(Eigen::Ref<Eigen::VectorXd> t) {
  // Pool-adjacent-violators: each block keeps (sum, count).
  struct Block {
    double sum;
    Eigen::Index count;
    double mean() const { return sum / static_cast<double>(count); }
  };
  bool inverted = false;
  for (Eigen::Index i = 0; i + 1 < t.size(); ++i) {
    if (t(i) > t(i + 1)) {
      inverted = true;
      break;
    }
  }
  if (!inverted) return;

  std::vector<Block> blocks;
  blocks.reserve(static_cast<std::size_t>(t.size()));
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    blocks.push_back({t(i), 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
      Block top = blocks.back();
      blocks.pop_back();
      blocks.back().sum += top.sum;
      blocks.back().count += top.count;
    }
  }
  Eigen::Index i = 0;
  for (const Block& b : blocks) {
    const double m = b.mean();
    for (Eigen::Index k = 0; k < b.count; ++k) t(i++) = m;
  }
}

namespace {

struct SubstepFlux {
  double heat_in_j = 0.0;
  double draw_enthalpy_j = 0.0;
};

// Advection, heating, standing loss, then buoyancy, in that order.
SubstepFlux substep(Eigen::VectorXd& t, double power_fraction, double draw_l, const TankParams& p) {
  SubstepFlux flux;
  const double layer_l = p.layer_volume_l();
  const double layer_heat_cap = layer_l * kWaterDensity * kWaterHeatCapacity;

  if (draw_l > 0.0) {
    if (draw_l > p.volume_l)
      throw std::invalid_argument("tank_step: draw per substep exceeds the tank volume");
    // Upwind plug flow of well-mixed layers, split so each move is at most one layer.
    const int moves = std::max(1, static_cast<int>(std::ceil(draw_l / layer_l)));
    const double frac = draw_l / (moves * layer_l);
    for (int m = 0; m < moves; ++m) {
      flux.draw_enthalpy_j += frac * layer_heat_cap * (t(t.size() - 1) - p.t_inlet);
      for (Eigen::Index i = t.size() - 1; i > 0; --i) t(i) += frac * (t(i - 1) - t(i));
      t(0) += frac * (p.t_inlet - t(0));
    }
  }

  if (power_fraction > 0.0) {
    const double q = power_fraction * p.p_rated_kw * 1000.0 * p.dt_sim;
    const int n_heat = p.heater_last - p.heater_first + 1;
    const double dt_layer = q / (n_heat * layer_heat_cap);
    t.segment(p.heater_first - 1, n_heat).array() += dt_layer;
    flux.heat_in_j = q;
  }

  if (p.ua_loss > 0.0) {
    const double coeff = p.ua_loss / p.layers * p.dt_sim / layer_heat_cap;
    t.array() -= coeff * (t.array() - p.t_ambient);
  }

  buoyancy_mix(t);
  return flux;
}

void check_draw(double draw_volume_l) {
  if (!(draw_volume_l >= 0.0) || !std::isfinite(draw_volume_l))
    throw std::invalid_argument("tank_step: draw volume must be finite and non-negative");
}

}  // namespace

TankState tank_step(TankState s, double u_phys, double draw_volume_l, const TankParams& p,
                    const SubstepObserver& observer) {
  check_draw(draw_volume_l);
  const int n = p.substeps();
  const double draw_sub = draw_volume_l / n;
  for (int i = 0; i < n; ++i) {
    substep(s.t, u_phys, draw_sub, p);
    if (observer) observer(s.t);
  }
  return s;
}

TankSlotResult tank_step_controlled(TankState s, Action u, double draw_volume_l, const TankParams& p,
                                    const SubstepObserver& observer) {
  check_draw(draw_volume_l);
  TankSlotResult r;
  const int n = p.substeps();
  const double draw_sub = draw_volume_l / n;
  double duty = 0.0;
  for (int i = 0; i < n; ++i) {
    const double on = thermostat_tank(s, u, p).value();
    if (draw_sub > 0.0 && s.t(s.t.size() - 1) < p.mix_setpoint) r.comfort_violation_s += p.dt_sim;
    const SubstepFlux f = substep(s.t, on, draw_sub, p);
    duty += on;
    r.heat_in_j += f.heat_in_j;
    r.draw_enthalpy_j += f.draw_enthalpy_j;
    if (observer) observer(s.t);
  }
  r.u_phys = duty / n;
  r.drawn_kg = draw_volume_l * kWaterDensity;
  r.state = std::move(s);
  return r;
}

double tank_sensor(const TankState& s, const TankParams& p) {
  const int n = p.heater_last - p.heater_first + 1;
  return s.t.segment(p.heater_first - 1, n).mean();
}

PhysicalAction thermostat_tank(const TankState& s, Action u, const TankParams& p) {
  const double sensor = tank_sensor(s, p);
  if (sensor < p.t_min) return PhysicalAction(1.0);
  if (sensor > p.t_max) return PhysicalAction(0.0);
  return PhysicalAction(as_double(u));
}

Eigen::VectorXd tank_observe(const TankState& after, double draw_volume_l) {
  Eigen::VectorXd o(2);
  o << draw_volume_l * kWaterDensity, after.t(after.t.size() - 1);
  return o;
}

double delivered_temperature(const TankState& s, const TankParams& p) {
  return std::min(s.t(s.t.size() - 1), p.mix_setpoint);
}

double tank_soc(const TankState& s, const TankParams& p) {
  const double layer_cap = p.layer_volume_l() * kWaterDensity * kWaterHeatCapacity;
  const double full = p.volume_l * kWaterDensity * kWaterHeatCapacity * (p.t_max - p.t_min);
  const double stored = layer_cap * (s.t.array() - p.t_min).sum();
  return std::max(0.0, stored / full);
}

double tank_enthalpy(const TankState& s, const TankParams& p) {
  return p.layer_volume_l() * kWaterDensity * kWaterHeatCapacity * s.t.sum();
}

}  // namespace tclrl
