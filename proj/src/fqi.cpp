#include "tclrl/fqi.hpp"

#include <stdexcept>

namespace tclrl {

std::vector<Transition> build_batch(const std::vector<RawTransition>& raw, int h, Eigen::Index obs_dim,
                                    Eigen::Index exo_dim) {
  if (h < 1) throw std::invalid_argument("build_batch: h must be >= 1");
  std::vector<Transition> out;
  out.reserve(raw.size());
  HistoryBuffer buffer(obs_dim, exo_dim, static_cast<std::size_t>(h));
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const RawTransition& r = raw[i];
    if (i > 0) {
      const RawTransition& prev = raw[i - 1];
      if (r.episode == prev.episode) {
        if (!(r.time == prev.time.next()))
          throw std::invalid_argument("build_batch: transitions of an episode are not consecutive slots");
      } else if (r.episode < prev.episode) {
        throw std::invalid_argument("build_batch: episodes out of order");
      } else {
        buffer = HistoryBuffer(obs_dim, exo_dim, static_cast<std::size_t>(h));
      }
    }
    Transition t;
    t.x = augment(buffer, h, r.time, r.x_exo);
    t.x.x_full = r.x_full;
    buffer.push(HistoryRecord{r.o_next, r.u_phys, r.u, r.x_exo});
    t.x_next = augment(buffer, h, r.time.next(), r.x_exo_next);
    t.x_next.x_full = r.x_full_next;
    t.u = r.u;
    t.u_phys = PhysicalAction(r.u_phys);
    out.push_back(std::move(t));
  }
  return out;
}

AugmentedState substitute_forecast(AugmentedState x, const Forecast& forecast, int quarter) {
  if (quarter < 1 || quarter > kSlotsPerDay) throw std::invalid_argument("substitute_forecast: quarter out of range");
  if (x.x_exo.size() == 0) return x;
  if (forecast.x_exo.rows() != kSlotsPerDay || forecast.x_exo.cols() != x.x_exo.size())
    throw std::invalid_argument("substitute_forecast: forecast shape mismatch");
  x.x_exo = forecast.x_exo.row(quarter - 1).transpose();
  return x;
}

void FqiConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("FqiConfig: iterations must be >= 1");
  if (!(p_rated_kw > 0) || !(dt_hours > 0)) throw std::invalid_argument("FqiConfig: power and step must be positive");
}

void run_fqi(const std::vector<Transition>& batch, const PriceProfile& lambda, const Forecast& forecast,
             const FqiConfig& cfg, QModel& model, const FqiObserver& observer) {
  cfg.validate();
  if (batch.empty()) throw std::invalid_argument("run_fqi: empty batch");
  const std::size_t n = batch.size();

  std::vector<AugmentedState> next;
  next.reserve(n);
  std::vector<const AugmentedState*> xs(n);
  std::vector<Action> us(n);
  Eigen::VectorXd cost(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    const Transition& t = batch[k];
    xs[k] = &t.x;
    us[k] = t.u;
    cost(static_cast<Eigen::Index>(k)) =
        step_cost(t.u_phys, lambda.at(t.x.time.quarter), cfg.p_rated_kw, cfg.dt_hours);
    next.push_back(substitute_forecast(t.x_next, forecast, t.x_next.time.quarter));
  }
  std::vector<const AugmentedState*> xn(n);
  for (std::size_t k = 0; k < n; ++k) xn[k] = &next[k];

  const Encoder& enc = model.encoder();
  const FeatureBatch inputs = enc.encode(xs, us);
  const FeatureBatch next_off = enc.encode(xn, std::vector<Action>(n, Action::Off));
  const FeatureBatch next_on = enc.encode(xn, std::vector<Action>(n, Action::On));
  model.fit_scaler(inputs);

  for (int iter = 1; iter <= cfg.iterations; ++iter) {
    Eigen::VectorXd target = cost;
    if (iter > 1) target += model.predict_batch(next_off).cwiseMin(model.predict_batch(next_on));
    model.fit(inputs, target);
    if (observer) observer(iter, model);
  }
}

}  // namespace tclrl
