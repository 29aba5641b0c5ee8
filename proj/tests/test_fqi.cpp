#include <doctest.h>

#include "oracles.hpp"
#include "tclrl/fqi.hpp"

using namespace tclrl;
using Eigen::VectorXd;
using namespace tclrl::oracle;

namespace {

RawTransition raw(int episode, int quarter, int day, double o, int u) {
  RawTransition r;
  r.episode = episode;
  r.time = TimeSlot(quarter, day);
  r.x_exo = VectorXd::Constant(1, 0.1 * quarter);
  r.x_exo_next = VectorXd::Constant(1, 0.1 * quarter + 0.05);
  r.u = action_from_int(u);
  r.u_phys = u;
  r.o_next = VectorXd::Constant(1, o);
  return r;
}

}  // namespace

TEST_CASE("build_batch") {
  SUBCASE("one tuple gets a zero-padded history") {
    const auto m = build_batch({raw(0, 5, 0, 3.0, 1)}, 2, 1, 1);
    REQUIRE(m.size() == 1);
    CHECK(m[0].x.hist.obs.isZero(0));
    CHECK(m[0].x.hist.u.isZero(0));
    CHECK(m[0].x.time == TimeSlot(5, 0));
    CHECK(m[0].x.x_exo(0) == doctest::Approx(0.5));
    CHECK(m[0].x_next.time == TimeSlot(6, 0));
    CHECK(m[0].x_next.hist.obs(0, 0) == 3.0);
    CHECK(m[0].x_next.hist.obs(1, 0) == 0.0);
    CHECK(m[0].x_next.hist.u(0) == 1.0);
    CHECK(m[0].x_next.x_exo(0) == doctest::Approx(0.55));
    CHECK(m[0].u_phys.value() == 1.0);
  }
  SUBCASE("contiguous tuples map one to one and their windows shift by a record") {
    std::vector<RawTransition> f;
    for (int k = 0; k < 10; ++k) f.push_back(raw(0, 91 + k <= 96 ? 91 + k : k - 5, 91 + k <= 96 ? 0 : 1, k, k % 2));
    const auto m = build_batch(f, 3, 1, 1);
    REQUIRE(m.size() == f.size());
    for (std::size_t k = 0; k + 1 < m.size(); ++k) {
      CHECK(m[k + 1].x.hist.obs.topRows(1) == m[k].x_next.hist.obs.topRows(1));
      CHECK(m[k + 1].x.hist.obs.bottomRows(2) == m[k].x.hist.obs.topRows(2));
      CHECK(m[k + 1].x.hist.u.tail(2) == m[k].x.hist.u.head(2));
      CHECK(m[k + 1].x.time == m[k].x_next.time);
    }
  }
  SUBCASE("a new episode starts from an empty history") {
    const auto m = build_batch({raw(0, 1, 0, 5.0, 1), raw(0, 2, 0, 6.0, 1), raw(1, 40, 3, 7.0, 0)}, 2, 1, 1);
    CHECK(m[1].x.hist.obs(0, 0) == 5.0);
    CHECK(m[2].x.hist.obs.isZero(0));
    CHECK(m[2].x.hist.u.isZero(0));
  }
  SUBCASE("unordered input is rejected") {
    CHECK_THROWS_AS(build_batch({raw(0, 2, 0, 0, 0), raw(0, 1, 0, 0, 0)}, 2, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(build_batch({raw(0, 2, 0, 0, 0), raw(0, 4, 0, 0, 0)}, 2, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(build_batch({raw(1, 2, 0, 0, 0), raw(0, 3, 0, 0, 0)}, 2, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(build_batch({raw(0, 2, 0, 0, 0)}, 0, 1, 1), std::invalid_argument);
  }
}

TEST_CASE("substitute_forecast") {
  AugmentedState x;
  x.time = TimeSlot(3, 0);
  x.hist.exo = Eigen::MatrixXd::Constant(4, 1, -7.0);
  x.x_exo = VectorXd::Constant(1, 2.0);
  Forecast f{Eigen::MatrixXd(VectorXd::LinSpaced(96, 1.0, 96.0))};

  const AugmentedState y = substitute_forecast(x, f, 10);
  CHECK(y.x_exo(0) == 10.0);
  CHECK(y.hist.exo == x.hist.exo);
  CHECK(substitute_forecast(y, f, 10).x_exo == y.x_exo);

  Forecast same{Eigen::MatrixXd::Constant(96, 1, 2.0)};
  CHECK(substitute_forecast(x, same, 3).x_exo == x.x_exo);

  AugmentedState none;
  none.x_exo = VectorXd(0);
  Forecast empty{Eigen::MatrixXd(96, 0)};
  CHECK(substitute_forecast(none, empty, 5).x_exo.size() == 0);
  CHECK_THROWS_AS(substitute_forecast(x, f, 0), std::invalid_argument);
  CHECK_THROWS_AS(substitute_forecast(x, f, 97), std::invalid_argument);
}

TEST_CASE("fitted Q-iteration reproduces dynamic programming on a toy plant at every horizon") {
  int calls = 0;
  bool monotone = false;
  CHECK(toy_fqi_worst_error(4, &calls, &monotone) == 0.0);
  CHECK(calls == 4);
  CHECK(monotone);
}

TEST_CASE("the first iteration regresses the one-step cost") {
  const auto batch = toy_batch();
  const PriceProfile lambda = dyadic_prices();
  QModel model = toy_model();
  run_fqi(batch, lambda, Forecast{Eigen::MatrixXd(96, 0)}, unit_cost(1), model);
  for (const Transition& t : batch)
    CHECK(model.predict(t.x, t.u) == t.u_phys.value() * lambda.at(t.x.time.quarter));
}

TEST_CASE("zero prices give a zero Q-function and an all-off policy") {
  const auto batch = toy_batch();
  QModel model = toy_model();
  run_fqi(batch, PriceProfile(), Forecast{Eigen::MatrixXd(96, 0)}, unit_cost(6), model);
  for (const Transition& t : batch) {
    CHECK(model.predict(t.x, Action::On) == 0.0);
    CHECK(greedy_action(model, t.x) == Action::Off);
  }
}

TEST_CASE("a perfect forecast leaves the logged successors unchanged") {
  std::vector<RawTransition> f;
  for (int q = 1; q <= 96; ++q) {
    RawTransition r = raw(0, q, 0, q % 3, q % 2);
    r.x_exo_next = VectorXd::Constant(1, 0.1 * (q % 96 + 1));
    f.push_back(r);
  }
  const auto m = build_batch(f, 2, 1, 1);
  Forecast perfect{Eigen::MatrixXd(96, 1)};
  for (int q = 1; q <= 96; ++q) perfect.x_exo(q - 1, 0) = 0.1 * q;
  for (const Transition& t : m) {
    const AugmentedState s = substitute_forecast(t.x_next, perfect, t.x_next.time.quarter);
    CHECK(s.x_exo == t.x_next.x_exo);
    CHECK(s.hist.exo == t.x_next.hist.exo);
  }
}

TEST_CASE("run_fqi rejects an empty batch and bad iteration counts") {
  QModel model = toy_model();
  CHECK_THROWS_AS(run_fqi({}, PriceProfile(), Forecast{Eigen::MatrixXd(96, 0)}, unit_cost(2), model),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_fqi(toy_batch(), PriceProfile(), Forecast{Eigen::MatrixXd(96, 0)}, unit_cost(0), model),
                  std::invalid_argument);
}
