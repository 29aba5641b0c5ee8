#include <doctest.h>

#include <cmath>
#include <vector>

#include "tclrl/mdp.hpp"

using namespace tclrl;

namespace {

HistoryRecord rec(double o, double up, int u) {
  HistoryRecord r;
  r.o_phys = Eigen::VectorXd::Constant(1, o);
  r.u_phys = up;
  r.u = action_from_int(u);
  r.x_exo = Eigen::VectorXd(0);
  return r;
}

struct FixedQ : QFunction {
  double off, on;
  bool ready = true;
  FixedQ(double a, double b) : off(a), on(b) {}
  bool trained() const override { return ready; }
  double predict(const AugmentedState&, Action u) const override { return u == Action::On ? on : off; }
};

}  // namespace

TEST_CASE("time slots cover 96 quarters and wrap into the next day") {
  CHECK_THROWS_AS(TimeSlot(0, 0), std::invalid_argument);
  CHECK_THROWS_AS(TimeSlot(97, 0), std::invalid_argument);
  CHECK_THROWS_AS(TimeSlot(1, -1), std::invalid_argument);
  CHECK(TimeSlot(96, 3).next() == TimeSlot(1, 4));
  CHECK(TimeSlot(5, 3).next() == TimeSlot(6, 3));
  CHECK(TimeSlot(1, 0).hour() == 0.0);
  CHECK(TimeSlot(96, 0).hour() == 23.75);
  int count = 0;
  for (TimeSlot t(1, 0); t.day == 0; t = t.next()) ++count;
  CHECK(count == 96);
}

TEST_CASE("physical action is confined to [0, 1]") {
  CHECK_NOTHROW(PhysicalAction(0.0));
  CHECK_NOTHROW(PhysicalAction(1.0));
  CHECK_THROWS_AS(PhysicalAction(1.0000001), std::invalid_argument);
  CHECK_THROWS_AS(PhysicalAction(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(PhysicalAction(std::nan("")), std::invalid_argument);
}

TEST_CASE("price profile needs 96 finite values; negatives allowed") {
  CHECK_THROWS_AS(PriceProfile(Eigen::VectorXd::Zero(95)), std::invalid_argument);
  Eigen::VectorXd v = Eigen::VectorXd::Constant(96, -0.01);
  CHECK(PriceProfile(v).at(96) == -0.01);
  v(3) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(PriceProfile{v}, std::invalid_argument);
}

TEST_CASE("augment windows the newest records newest-first") {
  HistoryBuffer buf(1, 0, 8);
  buf.push(rec(1.0, 1, 1));
  buf.push(rec(2.0, 0, 0));

  SUBCASE("exact depth") {
    const AugmentedState s = augment(buf, 2, TimeSlot(3, 0), Eigen::VectorXd(0));
    CHECK(s.hist.obs(0, 0) == 2.0);
    CHECK(s.hist.obs(1, 0) == 1.0);
    CHECK(s.hist.u_phys(0) == 0.0);
    CHECK(s.hist.u_phys(1) == 1.0);
    CHECK(s.hist.u(0) == 0.0);
    CHECK(s.hist.u(1) == 1.0);
    CHECK(s.time == TimeSlot(3, 0));
  }
  SUBCASE("zero padding of the oldest entries") {
    const AugmentedState s = augment(buf, 3, TimeSlot(3, 0), Eigen::VectorXd(0));
    CHECK(s.hist.obs.col(0) == Eigen::Vector3d(2.0, 1.0, 0.0));
    CHECK(s.hist.u(2) == 0.0);
  }
  SUBCASE("empty buffer") {
    HistoryBuffer empty(1, 0, 4);
    const AugmentedState s = augment(empty, 2, TimeSlot(1, 0), Eigen::VectorXd(0));
    CHECK(s.hist.obs.isZero(0));
    CHECK(s.hist.u_phys.isZero(0));
    CHECK(s.hist.u.isZero(0));
  }
  SUBCASE("non-positive depth") {
    CHECK_THROWS_AS(augment(buf, 0, TimeSlot(1, 0), Eigen::VectorXd(0)), std::invalid_argument);
    CHECK_THROWS_AS(augment(buf, -3, TimeSlot(1, 0), Eigen::VectorXd(0)), std::invalid_argument);
  }
}

TEST_CASE("augment output length is h for any buffer length") {
  HistoryBuffer buf(2, 1, 50);
  for (int n = 0; n < 30; ++n) {
    for (int h : {1, 5, 20, 40}) {
      const AugmentedState s = augment(buf, h, TimeSlot(1, 0), Eigen::VectorXd::Zero(1));
      CHECK(s.hist.depth() == h);
      CHECK(s.hist.obs.rows() == h);
      CHECK(s.hist.exo.rows() == h);
    }
    HistoryRecord r;
    r.o_phys = Eigen::Vector2d(n, -n);
    r.x_exo = Eigen::VectorXd::Constant(1, 0.5 * n);
    buf.push(r);
  }
}

TEST_CASE("history buffer rejects records of the wrong shape") {
  HistoryBuffer buf(2, 0, 4);
  CHECK_THROWS_AS(buf.push(rec(1.0, 0, 0)), std::invalid_argument);
}

TEST_CASE("step cost") {
  CHECK(step_cost(PhysicalAction(0.0), 0.05, 2.3, 0.25) == 0.0);
  CHECK(step_cost(PhysicalAction(1.0), 0.04, 2.3, 0.25) == doctest::Approx(0.023).epsilon(1e-15));
  CHECK(step_cost(PhysicalAction(0.5), -0.02, 2.3, 0.25) == doctest::Approx(-0.00575).epsilon(1e-15));
  // linear in u_phys and in price
  const double a = step_cost(PhysicalAction(0.3), 0.07, 2.3, 0.25);
  CHECK(step_cost(PhysicalAction(0.6), 0.07, 2.3, 0.25) == doctest::Approx(2 * a).epsilon(1e-15));
  CHECK(step_cost(PhysicalAction(0.3), 0.21, 2.3, 0.25) == doctest::Approx(3 * a).epsilon(1e-15));
}

TEST_CASE("exploration probability decays geometrically") {
  CHECK(exploration_prob(0) == 1.0);
  CHECK(exploration_prob(1) == 0.75);
  CHECK(exploration_prob(4) == 0.31640625);
  double expected = 1.0;
  for (int d = 0; d < 40; ++d) {
    if (d > 0) CHECK(exploration_prob(d) < exploration_prob(d - 1));
    if (d <= 33) CHECK(exploration_prob(d) == expected);  // 3^d fits in the mantissa
    expected *= 0.75;
  }
  CHECK(exploration_prob(200) < 1e-20);
  CHECK_THROWS_AS(exploration_prob(-1), std::invalid_argument);
}

TEST_CASE("greedy action is the argmin with ties to Off") {
  const AugmentedState x;
  CHECK(greedy_action(FixedQ(1.0, 2.0), x) == Action::Off);
  CHECK(greedy_action(FixedQ(2.0, 1.0), x) == Action::On);
  CHECK(greedy_action(FixedQ(1.5, 1.5), x) == Action::Off);
  for (double c : {-100.0, 0.0, 3.25, 1e6}) {
    CHECK(greedy_action(FixedQ(2.0 + c, 1.0 + c), x) == Action::On);
    CHECK(greedy_action(FixedQ(1.0 + c, 2.0 + c), x) == Action::Off);
  }
  FixedQ untrained(0, 0);
  untrained.ready = false;
  CHECK_THROWS_AS(greedy_action(untrained, x), InvalidState);
}

TEST_CASE("scaled cost") {
  CHECK(scaled_cost(4.0, 4.0, 6.0) == 0.0);
  CHECK(scaled_cost(6.0, 4.0, 6.0) == 1.0);
  CHECK(scaled_cost(5.0, 4.0, 6.0) == 0.5);
  CHECK(scaled_cost(0.731, 0.731, 1.093) == 0.0);
  CHECK(scaled_cost(1.093, 0.731, 1.093) == 1.0);
  CHECK_THROWS_AS(scaled_cost(1.0, 2.0, 2.0), DegenerateBaseline);
}

TEST_CASE("policy distance") {
  std::vector<Action> zeros(96, Action::Off), ones(96, Action::On);
  CHECK(policy_distance(zeros, zeros) == 0.0);
  std::vector<Action> one = zeros;
  one[0] = Action::On;
  CHECK(policy_distance(one, zeros) == 1.0);
  CHECK(policy_distance(ones, zeros) == doctest::Approx(std::sqrt(96.0)).epsilon(1e-15));
  std::vector<Action> short_vec(95);
  CHECK_THROWS_AS(policy_distance(short_vec, zeros), std::invalid_argument);
}
