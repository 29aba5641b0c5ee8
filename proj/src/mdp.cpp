#include "tclrl/mdp.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace tclrl {

TimeSlot::TimeSlot(int quarter_, int day_) : quarter(quarter_), day(day_) {
  if (quarter < 1 || quarter > kSlotsPerDay)
    throw std::invalid_argument("TimeSlot: quarter " + std::to_string(quarter) + " outside [1,96]");
  if (day < 0) throw std::invalid_argument("TimeSlot: negative day");
}

TimeSlot TimeSlot::next() const {
  if (quarter == kSlotsPerDay) return TimeSlot(1, day + 1);
  return TimeSlot(quarter + 1, day);
}

PhysicalAction::PhysicalAction(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0))
    throw std::invalid_argument("PhysicalAction: value " + std::to_string(value) + " outside [0,1]");
}

PriceProfile::PriceProfile() : lambda_(Eigen::VectorXd::Zero(kSlotsPerDay)) {}

PriceProfile::PriceProfile(Eigen::VectorXd lambda) : lambda_(std::move(lambda)) {
  if (lambda_.size() != kSlotsPerDay)
    throw std::invalid_argument("PriceProfile: expected 96 values, got " + std::to_string(lambda_.size()));
  if (!lambda_.allFinite()) throw std::invalid_argument("PriceProfile: non-finite price");
}

HistoryBuffer::HistoryBuffer(Eigen::Index obs_dim, Eigen::Index exo_dim, std::size_t capacity)
    : obs_dim_(obs_dim), exo_dim_(exo_dim), capacity_(capacity) {}

void HistoryBuffer::push(HistoryRecord record) {
  if (record.o_phys.size() != obs_dim_ || record.x_exo.size() != exo_dim_)
    throw std::invalid_argument("HistoryBuffer: record dimensions do not match the buffer");
  records_.push_back(std::move(record));
  while (records_.size() > capacity_) records_.pop_front();
}

AugmentedState augment(const HistoryBuffer& buffer, int h, TimeSlot time, const Eigen::VectorXd& x_exo) {
  if (h <= 0) throw std::invalid_argument("augment: history depth must be positive");
  AugmentedState s;
  s.time = time;
  s.x_exo = x_exo;
  HistoryWindow& w = s.hist;
  w.obs = Eigen::MatrixXd::Zero(h, buffer.obs_dim());
  w.exo = Eigen::MatrixXd::Zero(h, buffer.exo_dim());
  w.u_phys = Eigen::VectorXd::Zero(h);
  w.u = Eigen::VectorXd::Zero(h);
  const std::size_t available = std::min<std::size_t>(buffer.size(), static_cast<std::size_t>(h));
  for (std::size_t t = 0; t < available; ++t) {
    const HistoryRecord& r = buffer.newest(t);
    const auto row = static_cast<Eigen::Index>(t);
    w.obs.row(row) = r.o_phys.transpose();
    w.exo.row(row) = r.x_exo.transpose();
    w.u_phys(row) = r.u_phys;
    w.u(row) = as_double(r.u);
  }
  return s;
}

double step_cost(PhysicalAction u_phys, double lambda, double p_rated_kw, double dt_hours) {
  return u_phys.value() * p_rated_kw * lambda * dt_hours;
}

double exploration_prob(int day) {
  if (day < 0) throw std::invalid_argument("exploration_prob: negative episode index");
  return std::pow(0.75, day);
}

Action greedy_action(const QFunction& q, const AugmentedState& x) {
  if (!q.trained()) throw InvalidState("greedy_action: Q-function has not been fitted");
  const double q_off = q.predict(x, Action::Off);
  const double q_on = q.predict(x, Action::On);
  return q_on < q_off ? Action::On : Action::Off;
}

double scaled_cost(double c, double c_full, double c_nocontrol) {
  if (c_nocontrol == c_full)
    throw DegenerateBaseline("scaled_cost: no-control and full-state costs coincide");
  return (c - c_full) / (c_nocontrol - c_full);
}

double policy_distance(std::span<const Action> a, std::span<const Action> b) {
  if (a.size() != b.size()) throw std::invalid_argument("policy_distance: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = as_double(a[i]) - as_double(b[i]);
    sum += d * d;
  }
  return std::sqrt(sum);
}

}  // namespace tclrl
