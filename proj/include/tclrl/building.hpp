#pragma once

#include "tclrl/mdp.hpp"

namespace tclrl {

/// Second-order (2R2C) building with an air node and a virtual mass node.
/// Capacities in J/degC, conductances in W/degC, time steps in seconds.
struct BuildingParams {
  double c_air = 2.441e6;
  double ua_air = 125.0;
  double c_mass = 9.0e6;
  double h_mass = 6863.0;
  double p_rated_kw = 2.3;
  double cop = 3.0;
  double t_min = 20.0;
  double t_max = 23.0;
  double sigma_w = 0.025;
  double dt_sim = 60.0;
  double dt_ctrl = 900.0;

  void validate() const;
  int substeps() const;
};

struct BuildingState {
  double t_air = 21.0;
  double t_mass = 21.0;
};

/// Explicit Euler over one control slot at dt_sim, then adds `w` to the air temperature.
BuildingState building_step(BuildingState s, double u_phys, double t_out, double w, const BuildingParams& p);

/// Backup thermostat: forces On below t_min, Off above t_max, passes `u` through otherwise.
PhysicalAction thermostat_building(const BuildingState& s, Action u, const BuildingParams& p);

}  // namespace tclrl
