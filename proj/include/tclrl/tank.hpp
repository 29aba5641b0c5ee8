#pragma once

#include <functional>

#include <Eigen/Core>

#include "tclrl/mdp.hpp"

namespace tclrl {

inline constexpr double kWaterDensity = 1.0;     // kg/L
inline constexpr double kWaterHeatCapacity = 4186.0;  // J/(kg degC)

/// Stratified electric water heater. Layers are numbered 1 (bottom) .. layers (top)
/// in this struct; TankState stores them 0-based.
struct TankParams {
  double volume_l = 200.0;
  int layers = 50;
  double p_rated_kw = 2.3;
  double t_min = 45.0;
  double t_max = 65.0;
  double t_inlet = 10.0;
  double t_ambient = 20.0;
  double ua_loss = 1.5;          // W/degC, whole tank
  int heater_first = 1;
  int heater_last = 10;
  double mix_setpoint = 45.0;
  double dt_sim = 5.0;
  double dt_ctrl = 900.0;
  double mean_daily_draw_l = 100.0;

  void validate() const;
  int substeps() const;
  double layer_volume_l() const { return volume_l / layers; }
};

struct TankState {
  Eigen::VectorXd t;  // degC, index 0 = bottom

  static TankState uniform(const TankParams& p, double temperature);
};

/// Per-slot bookkeeping from the controlled stepper.
struct TankSlotResult {
  TankState state;
  double u_phys = 0.0;           // mean heater duty over the slot
  double heat_in_j = 0.0;        // electric energy deposited
  double draw_enthalpy_j = 0.0;  // enthalpy carried out minus enthalpy of inlet water
  double drawn_kg = 0.0;
  double comfort_violation_s = 0.0;  // drawing while the top layer is below mix_setpoint
};

using SubstepObserver = std::function<void(const Eigen::VectorXd&)>;

/// One slot with a constant heater fraction `u_phys`; the draw is spread evenly
/// over the substeps. `observer`, if set, sees the layer vector after each substep.
TankState tank_step(TankState s, double u_phys, double draw_volume_l, const TankParams& p,
                    const SubstepObserver& observer = {});

/// One slot where the backup thermostat is re-evaluated at every substep
/// against the requested action `u`.
TankSlotResult tank_step_controlled(TankState s, Action u, double draw_volume_l, const TankParams& p,
                                    const SubstepObserver& observer = {});

/// Thermostat reading: mean of the heater-span layers.
double tank_sensor(const TankState& s, const TankParams& p);

PhysicalAction thermostat_tank(const TankState& s, Action u, const TankParams& p);

/// Agent observation at the end of a slot: (outflow mass [kg], top-layer temperature).
Eigen::VectorXd tank_observe(const TankState& after, double draw_volume_l);

/// Temperature at the tap after the thermostatic mixing valve.
double delivered_temperature(const TankState& s, const TankParams& p);

/// Stored energy relative to t_min, normalised by the t_min..t_max band; clamped below at 0.
double tank_soc(const TankState& s, const TankParams& p);

/// Enthalpy relative to 0 degC, in J.
double tank_enthalpy(const TankState& s, const TankParams& p);

/// Restores a non-decreasing bottom-to-top profile by merging inverted runs
/// into their volume-weighted mean (equal layer volumes).
void buoyancy_mix(Eigen::Ref<Eigen::VectorXd> t);

}  // namespace tclrl
