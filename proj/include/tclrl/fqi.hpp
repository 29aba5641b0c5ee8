#pragma once

// Fitted Q-iteration over history-augmented transitions, with the observed
// next-state exogenous values replaced by a forecast for the day being planned.

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "tclrl/mdp.hpp"
#include "tclrl/regressor.hpp"

namespace tclrl {

/// One logged control slot before augmentation.
struct RawTransition {
  int episode = 0;
  TimeSlot time;
  Eigen::VectorXd x_exo;        // exogenous value when u was chosen
  Eigen::VectorXd x_full;       // hidden simulator state when u was chosen
  Action u = Action::Off;
  double u_phys = 0.0;
  Eigen::VectorXd o_next;       // observation at the end of the slot
  Eigen::VectorXd x_exo_next;
  Eigen::VectorXd x_full_next;
};

/// Augments every raw tuple and its successor with the h most recent records
/// of its own episode. Consecutive tuples of one episode must be consecutive
/// slots; a new episode id starts a fresh (zero-padded) history.
std::vector<Transition> build_batch(const std::vector<RawTransition>& raw, int h, Eigen::Index obs_dim,
                                    Eigen::Index exo_dim);

/// Forecast of the exogenous inputs for the planned day: 96 x dim(x_exo).
struct Forecast {
  Eigen::MatrixXd x_exo;
};

/// Replaces only the current exogenous component by forecast row `quarter` (1-based).
AugmentedState substitute_forecast(AugmentedState x, const Forecast& forecast, int quarter);

struct FqiConfig {
  int iterations = 96;
  double p_rated_kw = 2.3;
  double dt_hours = 0.25;

  void validate() const;
};

/// Called after each fit with the iteration number N (1-based).
using FqiObserver = std::function<void(int, const QModel&)>;

/// Runs T iterations starting from Q-hat_0 = 0 and leaves Q-hat_T in `model`.
/// The input scaler is refitted on the batch once, before the first fit.
void run_fqi(const std::vector<Transition>& batch, const PriceProfile& lambda, const Forecast& forecast,
             const FqiConfig& cfg, QModel& model, const FqiObserver& observer = {});

}  // namespace tclrl
