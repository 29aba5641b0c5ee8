#include "tclrl/features.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tclrl {

FeatureBatch FeatureBatch::columns(std::span<const Eigen::Index> idx) const {
  FeatureBatch out;
  out.seq_len = seq_len;
  out.channels = channels;
  out.seq.resize(seq.rows(), static_cast<Eigen::Index>(idx.size()));
  out.aux.resize(aux.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const auto c = static_cast<Eigen::Index>(j);
    if (seq.rows() > 0) out.seq.col(c) = seq.col(idx[j]);
    out.aux.col(c) = aux.col(idx[j]);
  }
  return out;
}

Eigen::MatrixXd FeatureBatch::design_matrix() const {
  Eigen::MatrixXd x(size(), flat_dim());
  if (seq.rows() > 0) x.leftCols(seq.rows()) = seq.transpose();
  x.rightCols(aux.rows()) = aux.transpose();
  return x;
}

Encoder::Encoder(StateView view, Eigen::Index h, Eigen::Index obs_dim, Eigen::Index exo_dim, Eigen::Index full_dim)
    : view_(view), h_(h), obs_dim_(obs_dim), exo_dim_(exo_dim), full_dim_(full_dim) {
  if (view == StateView::Partial && h < 1) throw std::invalid_argument("Encoder: history depth must be positive");
  if (view == StateView::Full && full_dim < 1) throw std::invalid_argument("Encoder: full view needs a full state");
}

Eigen::Index Encoder::aux_dim() const {
  return 3 + (view_ == StateView::Full ? full_dim_ : 0) + exo_dim_ + 1;
}

void Encoder::write(const AugmentedState& x, Action u, Eigen::Index col, FeatureBatch& out) const {
  if (x.x_exo.size() != exo_dim_) throw std::invalid_argument("Encoder: exogenous dimension mismatch");
  const double angle = 2.0 * std::numbers::pi * x.time.quarter / kSlotsPerDay;
  auto aux = out.aux.col(col);
  aux(0) = std::sin(angle);
  aux(1) = std::cos(angle);
  aux(2) = static_cast<double>(x.time.quarter) / kSlotsPerDay;
  Eigen::Index r = 3;
  if (view_ == StateView::Full) {
    if (x.x_full.size() != full_dim_) throw std::invalid_argument("Encoder: full-state dimension mismatch");
    aux.segment(r, full_dim_) = x.x_full;
    r += full_dim_;
  } else {
    const HistoryWindow& w = x.hist;
    if (w.depth() != h_ || w.obs.cols() != obs_dim_ || w.exo.cols() != exo_dim_)
      throw std::invalid_argument("Encoder: history window shape mismatch");
    const Eigen::Index ch = channels();
    auto seq = out.seq.col(col);
    for (Eigen::Index t = 0; t < h_; ++t) {
      auto step = seq.segment(t * ch, ch);
      step(0) = w.u_phys(t);
      step(1) = w.u(t);
      if (obs_dim_ > 0) step.segment(2, obs_dim_) = w.obs.row(t).transpose();
      if (exo_dim_ > 0) step.segment(2 + obs_dim_, exo_dim_) = w.exo.row(t).transpose();
    }
  }
  aux.segment(r, exo_dim_) = x.x_exo;
  aux(r + exo_dim_) = as_double(u);
}

FeatureBatch Encoder::encode(std::span<const AugmentedState* const> xs, std::span<const Action> us) const {
  if (xs.size() != us.size()) throw std::invalid_argument("Encoder: states and actions differ in count");
  FeatureBatch out;
  out.seq_len = seq_len();
  out.channels = channels();
  const auto n = static_cast<Eigen::Index>(xs.size());
  out.seq.resize(seq_len() * channels(), n);
  out.aux.resize(aux_dim(), n);
  for (Eigen::Index j = 0; j < n; ++j) write(*xs[static_cast<std::size_t>(j)], us[static_cast<std::size_t>(j)], j, out);
  return out;
}

FeatureBatch Encoder::encode(const AugmentedState& x, Action u) const {
  const AugmentedState* xs[] = {&x};
  const Action us[] = {u};
  return encode(xs, us);
}

void MinMaxScaler::fit(const FeatureBatch& batch) {
  if (batch.size() == 0) throw std::invalid_argument("MinMaxScaler: empty batch");
  const Eigen::Index ch = batch.channels;
  seq_min_ = Eigen::VectorXd::Constant(ch, std::numeric_limits<double>::infinity());
  Eigen::VectorXd seq_max = Eigen::VectorXd::Constant(ch, -std::numeric_limits<double>::infinity());
  for (Eigen::Index t = 0; t < batch.seq_len; ++t) {
    const auto block = batch.seq.middleRows(t * ch, ch);
    seq_min_ = seq_min_.cwiseMin(block.rowwise().minCoeff());
    seq_max = seq_max.cwiseMax(block.rowwise().maxCoeff());
  }
  seq_range_ = seq_max - seq_min_;
  aux_min_ = batch.aux.rowwise().minCoeff();
  aux_range_ = batch.aux.rowwise().maxCoeff() - aux_min_;
  fitted_ = true;
}

void MinMaxScaler::set(Eigen::VectorXd seq_min, Eigen::VectorXd seq_range, Eigen::VectorXd aux_min,
                       Eigen::VectorXd aux_range) {
  seq_min_ = std::move(seq_min);
  seq_range_ = std::move(seq_range);
  aux_min_ = std::move(aux_min);
  aux_range_ = std::move(aux_range);
  fitted_ = true;
}

void MinMaxScaler::transform(FeatureBatch& batch) const {
  if (!fitted_) throw InvalidState("MinMaxScaler: transform before fit");
  if (batch.channels != seq_min_.size() || batch.aux.rows() != aux_min_.size())
    throw std::invalid_argument("MinMaxScaler: feature layout differs from the fitted one");
  const Eigen::VectorXd seq_inv = (seq_range_.array() > 0).select(seq_range_.cwiseInverse(), 1.0);
  const Eigen::VectorXd aux_inv = (aux_range_.array() > 0).select(aux_range_.cwiseInverse(), 1.0);
  const Eigen::Index ch = batch.channels;
  for (Eigen::Index t = 0; t < batch.seq_len; ++t) {
    auto block = batch.seq.middleRows(t * ch, ch);
    block = ((block.colwise() - seq_min_).array().colwise() * seq_inv.array()).matrix();
  }
  batch.aux = ((batch.aux.colwise() - aux_min_).array().colwise() * aux_inv.array()).matrix();
}

}  // namespace tclrl
