#include "tclrl/harness.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tclrl {

namespace {
constexpr std::uint64_t kExplorationStream = 6;

std::mt19937_64 exploration_rng(std::uint64_t seed) { return day_rng(seed, 0, kExplorationStream); }

ExperimentRun learning_run(const ScenarioConfig& cfg, std::uint64_t seed, StateView view, const ApproxConfig& approx,
                           std::string label) {
  cfg.validate();
  auto env = make_environment(cfg, seed);
  const int h = cfg.resolved_history();
  QModel model(Encoder(view, h, env->obs_dim(), env->exo_dim(), env->full_dim()), approx);
  HistoryBuffer history(env->obs_dim(), env->exo_dim(), static_cast<std::size_t>(h));
  auto rng = exploration_rng(seed);
  std::vector<RawTransition> raw;
  raw.reserve(static_cast<std::size_t>(cfg.days) * kSlotsPerDay);

  FqiConfig fqi = cfg.fqi;
  fqi.p_rated_kw = env->p_rated_kw();

  ExperimentRun run;
  run.label = std::move(label);
  run.seed = seed;
  for (int d = 0; d < cfg.days; ++d) {
    const double eps = exploration_prob(d);
    const QFunction* q = model.trained() ? &model : nullptr;
    if (!q && eps < 1.0) {
      run.failed = true;
      run.error = "no trained policy available on day " + std::to_string(d);
      break;
    }
    run.days.push_back(run_day(*env, d, history, h, q, eps, rng, &raw));
    if (d + 1 == cfg.days) break;
    try {
      const auto batch = build_batch(raw, h, env->obs_dim(), env->exo_dim());
      run_fqi(batch, env->source().day(d + 1).lambda, env->forecast(d + 1), fqi, model);
    } catch (const TrainingDiverged& e) {
      run.failed = true;
      run.error = std::string(e.what()) + " (last finite loss " + std::to_string(e.last_finite_loss()) + ")";
      break;
    }
  }
  return run;
}
}  // namespace

void ScenarioConfig::validate() const {
  if (scenario != "heatpump" && scenario != "boiler")
    throw std::invalid_argument("scenario: expected heatpump or boiler, got '" + scenario + "'");
  if (days < 1) throw std::invalid_argument("days: must be >= 1");
  if (history < 0) throw std::invalid_argument("history: must be >= 0");
  if (seeds.empty()) throw std::invalid_argument("seeds: at least one seed is required");
  if (!is_approx_kind(approx.kind)) throw std::invalid_argument("approx: unknown approximator '" + approx.kind + "'");
  if (full_state_approx != "trees" && full_state_approx != "mlp")
    throw std::invalid_argument("full_state_approx: expected trees or mlp");
  approx.train.validate();
  approx.trees.validate();
  fqi.validate();
  building.validate();
  tank.validate();
}

int ScenarioConfig::resolved_history() const {
  if (history > 0) return history;
  return scenario == "boiler" ? 40 : 20;
}

ApproxConfig ScenarioConfig::resolved_approx(std::uint64_t seed) const {
  ApproxConfig a = approx;
  if (a.lstm_cell == 0) a.lstm_cell = scenario == "boiler" ? 12 : 8;
  a.train.seed = seed;
  a.trees.seed = seed;
  return a;
}

std::unique_ptr<Environment> make_environment(const ScenarioConfig& cfg, std::uint64_t seed) {
  ExogenousSource source(cfg.data, seed, cfg.tank.mean_daily_draw_l);
  if (cfg.scenario == "heatpump") return std::make_unique<HeatPumpEnv>(cfg.building, source, cfg.building_initial);
  if (cfg.scenario == "boiler") return std::make_unique<BoilerEnv>(cfg.tank, source, cfg.tank_initial_c);
  throw std::invalid_argument("unknown scenario '" + cfg.scenario + "'");
}

std::vector<double> ExperimentRun::daily_costs() const {
  std::vector<double> out;
  for (const auto& d : days) out.push_back(d.cost_eur);
  return out;
}

std::vector<double> ExperimentRun::cumulative_costs() const {
  std::vector<double> out = daily_costs();
  std::partial_sum(out.begin(), out.end(), out.begin());
  return out;
}

DayLog run_day(Environment& env, int day, HistoryBuffer& history, int h, const QFunction* q, double epsilon,
               std::mt19937_64& rng, std::vector<RawTransition>* raw, int episode) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("run_day: epsilon outside [0, 1]");
  if (!q && epsilon < 1.0) throw std::invalid_argument("run_day: greedy steps need a Q-function");
  env.begin_day(day);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  constexpr double kDtHours = 0.25;

  DayLog log;
  log.day = day;
  log.epsilon = epsilon;
  for (int k = 0; k < kSlotsPerDay; ++k) {
    const TimeSlot now = env.now();
    const Eigen::VectorXd x_exo = env.exo_now();
    const Eigen::VectorXd x_full = env.full_state();
    // Draw the exploration coin every slot so the random stream does not depend on q.
    const bool explore = unit(rng) < epsilon;
    const bool flip = coin(rng);
    Action u;
    if (explore) {
      u = flip ? Action::On : Action::Off;
    } else {
      AugmentedState x = augment(history, h, now, x_exo);
      x.x_full = x_full;
      u = greedy_action(*q, x);
    }
    const SlotOutcome out = env.step(u);
    log.cost_eur += step_cost(PhysicalAction(out.u_phys), out.price, env.p_rated_kw(), kDtHours);
    log.comfort_violation_min += out.comfort_violation_min;
    log.u.push_back(u);
    log.u_phys.push_back(out.u_phys);
    log.price.push_back(out.price);
    log.metric.push_back(out.metric);
    if (raw)
      raw->push_back(RawTransition{episode, now, x_exo, x_full, u, out.u_phys, out.o_next, env.exo_now(),
                                   env.full_state()});
    history.push(HistoryRecord{out.o_next, out.u_phys, u, x_exo});
  }
  return log;
}

ExperimentRun run_experiment(const ScenarioConfig& cfg, std::uint64_t seed) {
  return learning_run(cfg, seed, StateView::Partial, cfg.resolved_approx(seed), cfg.resolved_approx(seed).kind);
}

ExperimentRun baseline_full_state(const ScenarioConfig& cfg, std::uint64_t seed) {
  ApproxConfig a = cfg.resolved_approx(seed);
  a.kind = cfg.full_state_approx;
  return learning_run(cfg, seed, StateView::Full, a, "fullstate");
}

ExperimentRun baseline_no_control(const ScenarioConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  auto env = make_environment(cfg, seed);
  const int h = cfg.resolved_history();
  HistoryBuffer history(env->obs_dim(), env->exo_dim(), static_cast<std::size_t>(h));
  auto rng = exploration_rng(seed);
  const AlwaysOff off;
  ExperimentRun run;
  run.label = "nocontrol";
  run.seed = seed;
  for (int d = 0; d < cfg.days; ++d) run.days.push_back(run_day(*env, d, history, h, &off, 0.0, rng, nullptr));
  return run;
}

ExperimentRun evaluate_frozen(const ScenarioConfig& cfg, std::uint64_t seed, const QModel& model, int first_day,
                              int n_days) {
  if (first_day < 0 || n_days < 1) throw std::invalid_argument("evaluate_frozen: bad day range");
  auto env = make_environment(cfg, seed);
  const int h = cfg.resolved_history();
  HistoryBuffer history(env->obs_dim(), env->exo_dim(), static_cast<std::size_t>(h));
  auto rng = exploration_rng(seed);
  ExperimentRun run;
  run.label = model.config().kind + "-frozen";
  run.seed = seed;
  for (int d = first_day; d < first_day + n_days; ++d)
    run.days.push_back(run_day(*env, d, history, h, &model, 0.0, rng, nullptr));
  return run;
}

Band aggregate_seeds(const std::vector<std::vector<double>>& runs) {
  if (runs.size() < 2) throw std::invalid_argument("aggregate_seeds: need at least two runs");
  const std::size_t n = runs.front().size();
  for (const auto& r : runs)
    if (r.size() != n) throw std::invalid_argument("aggregate_seeds: runs differ in length");
  Band b;
  const double m = static_cast<double>(runs.size());
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (const auto& r : runs) sum += r[i];
    const double mean = sum / m;
    double ss = 0.0;
    for (const auto& r : runs) ss += (r[i] - mean) * (r[i] - mean);
    const double sd = std::sqrt(ss / (m - 1.0));
    b.mean.push_back(mean);
    b.lo.push_back(mean - 2.0 * sd);
    b.hi.push_back(mean + 2.0 * sd);
  }
  return b;
}

}  // namespace tclrl
