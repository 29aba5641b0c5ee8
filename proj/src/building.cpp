#include "tclrl/building.hpp"

#include <cmath>
#include <stdexcept>

namespace tclrl {

void BuildingParams::validate() const {
  if (!(c_air > 0 && ua_air >= 0 && c_mass > 0 && h_mass >= 0 && p_rated_kw > 0 && cop > 0))
    throw std::invalid_argument("BuildingParams: capacities and power must be positive");
  if (!(t_min < t_max)) throw std::invalid_argument("BuildingParams: t_min must be below t_max");
  if (!(sigma_w >= 0)) throw std::invalid_argument("BuildingParams: sigma_w must be non-negative");
  if (!(dt_sim > 0 && dt_ctrl > 0)) throw std::invalid_argument("BuildingParams: time steps must be positive");
  const double ratio = dt_ctrl / dt_sim;
  if (std::abs(ratio - std::round(ratio)) > 1e-9)
    throw std::invalid_argument("BuildingParams: dt_ctrl must be an integer multiple of dt_sim");
}

int BuildingParams::substeps() const { return static_cast<int>(std::lround(dt_ctrl / dt_sim)); }

BuildingState building_step(BuildingState s, double u_phys, double t_out, double w, const BuildingParams& p) {
  const double heat_w = u_phys * p.p_rated_kw * p.cop * 1000.0;
  const int n = p.substeps();
  for (int i = 0; i < n; ++i) {
    const double q_air = p.ua_air * (t_out - s.t_air) + p.h_mass * (s.t_mass - s.t_air) + heat_w;
    const double q_mass = p.h_mass * (s.t_air - s.t_mass);
    s.t_air += p.dt_sim * q_air / p.c_air;
    s.t_mass += p.dt_sim * q_mass / p.c_mass;
  }
  s.t_air += w;
  return s;
}

PhysicalAction thermostat_building(const BuildingState& s, Action u, const BuildingParams& p) {
  if (s.t_air < p.t_min) return PhysicalAction(1.0);
  if (s.t_air > p.t_max) return PhysicalAction(0.0);
  return PhysicalAction(as_double(u));
}

}  // namespace tclrl
