#pragma once

// Core decision-process types: time slots, actions, observations, the
// history-augmented state and the cost/metric formulas shared by the rest of
// the library.

#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "tclrl/errors.hpp"

namespace tclrl {

inline constexpr int kSlotsPerDay = 96;

/// 15-minute slot within a day. quarter is 1-based.
struct TimeSlot {
  int quarter = 1;
  int day = 0;

  TimeSlot() = default;
  TimeSlot(int quarter_, int day_);

  TimeSlot next() const;
  /// Hours since midnight at the start of the slot.
  double hour() const { return 0.25 * (quarter - 1); }
  long absolute() const { return static_cast<long>(day) * kSlotsPerDay + quarter - 1; }

  friend bool operator==(const TimeSlot&, const TimeSlot&) = default;
};

enum class Action : std::uint8_t { Off = 0, On = 1 };

inline double as_double(Action u) { return u == Action::On ? 1.0 : 0.0; }
inline Action action_from_int(int v) { return v != 0 ? Action::On : Action::Off; }

/// Fraction of rated power actually drawn over a slot, after the backup controller.
class PhysicalAction {
 public:
  PhysicalAction() = default;
  explicit PhysicalAction(double value);
  double value() const { return value_; }

 private:
  double value_ = 0.0;
};

struct ObservedState {
  TimeSlot time;
  Eigen::VectorXd o_phys;
  Eigen::VectorXd x_exo;
};

/// One completed control slot as stored in the history.
///
/// `o_phys` is the observation taken at the END of the slot, so a window that
/// starts at the newest record pairs o_k with u_{k-1}, u_phys_{k-1} (the
/// water-heater alignment). `x_exo` is the exogenous value during the slot.
struct HistoryRecord {
  Eigen::VectorXd o_phys;
  double u_phys = 0.0;
  Action u = Action::Off;
  Eigen::VectorXd x_exo;
};

/// Fixed-length history, newest first. Row t of every member refers to the same slot.
struct HistoryWindow {
  Eigen::MatrixXd obs;        // h x dim(o_phys)
  Eigen::VectorXd u_phys;     // h
  Eigen::VectorXd u;          // h
  Eigen::MatrixXd exo;        // h x dim(x_exo)

  Eigen::Index depth() const { return u.size(); }
};

struct AugmentedState {
  TimeSlot time;
  HistoryWindow hist;
  Eigen::VectorXd x_exo;
  /// Hidden simulator state (air/mass or layer temperatures). Empty unless the
  /// run is a full-information baseline.
  Eigen::VectorXd x_full;
};

struct Transition {
  AugmentedState x;
  Action u = Action::Off;
  AugmentedState x_next;
  PhysicalAction u_phys;
};

/// Day-ahead price, EUR/kWh per quarter. Negative values are allowed.
class PriceProfile {
 public:
  PriceProfile();
  explicit PriceProfile(Eigen::VectorXd lambda);

  double at(int quarter) const { return lambda_(quarter - 1); }
  const Eigen::VectorXd& values() const { return lambda_; }

 private:
  Eigen::VectorXd lambda_;
};

/// Bounded FIFO of past slots. Dimensions are fixed at construction so an
/// empty buffer still yields correctly shaped (zero) windows.
class HistoryBuffer {
 public:
  HistoryBuffer(Eigen::Index obs_dim, Eigen::Index exo_dim, std::size_t capacity);

  void push(HistoryRecord record);
  std::size_t size() const { return records_.size(); }
  std::size_t capacity() const { return capacity_; }
  Eigen::Index obs_dim() const { return obs_dim_; }
  Eigen::Index exo_dim() const { return exo_dim_; }
  /// i = 0 is the newest record.
  const HistoryRecord& newest(std::size_t i) const { return records_[records_.size() - 1 - i]; }

 private:
  Eigen::Index obs_dim_;
  Eigen::Index exo_dim_;
  std::size_t capacity_;
  std::deque<HistoryRecord> records_;
};

/// Q-function as seen by a controller: a cost-to-go estimate per (state, action).
class QFunction {
 public:
  virtual ~QFunction() = default;
  virtual bool trained() const = 0;
  virtual double predict(const AugmentedState& x, Action u) const = 0;
};

/// Windows the newest `h` records, zero-padding slots before the start of the buffer.
AugmentedState augment(const HistoryBuffer& buffer, int h, TimeSlot time, const Eigen::VectorXd& x_exo);

/// EUR for one slot: u_phys * P_rated[kW] * lambda[EUR/kWh] * dt[h].
double step_cost(PhysicalAction u_phys, double lambda, double p_rated_kw, double dt_hours);

/// epsilon_d = 0.75^d.
double exploration_prob(int day);

/// argmin_u Q(x, u); ties go to Off.
Action greedy_action(const QFunction& q, const AugmentedState& x);

/// (c - c_full) / (c_nocontrol - c_full).
double scaled_cost(double c, double c_full, double c_nocontrol);

/// Euclidean distance between two action vectors.
double policy_distance(std::span<const Action> a, std::span<const Action> b);

}  // namespace tclrl
