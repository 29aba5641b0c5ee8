#pragma once

// Mapping from (augmented state, action) pairs to the numeric inputs seen by the
// regressors, plus min-max scaling frozen per fitted-Q run.

#include <span>
#include <vector>

#include <Eigen/Core>

#include "tclrl/mdp.hpp"

namespace tclrl {

/// Column-per-sample inputs. `seq` stacks seq_len blocks of `channels` rows,
/// block t holding sequence element t + 1 (newest history entry first).
struct FeatureBatch {
  Eigen::Index seq_len = 0;
  Eigen::Index channels = 0;
  Eigen::MatrixXd seq;
  Eigen::MatrixXd aux;

  Eigen::Index size() const { return aux.cols(); }
  Eigen::Index flat_dim() const { return seq.rows() + aux.rows(); }
  FeatureBatch columns(std::span<const Eigen::Index> idx) const;
  /// Samples x features, history first. Used by the tree ensemble.
  Eigen::MatrixXd design_matrix() const;
};

enum class StateView { Partial, Full };

/// Partial view: sequence element t = [u_phys, u, o_phys..., x_exo...] of history row t;
/// aux = [sin, cos, quarter/96, x_exo..., u].
/// Full view: no sequence; aux = [sin, cos, quarter/96, x_full..., x_exo..., u].
class Encoder {
 public:
  Encoder() = default;
  Encoder(StateView view, Eigen::Index h, Eigen::Index obs_dim, Eigen::Index exo_dim, Eigen::Index full_dim);

  StateView view() const { return view_; }
  Eigen::Index seq_len() const { return view_ == StateView::Partial ? h_ : 0; }
  Eigen::Index channels() const { return view_ == StateView::Partial ? 2 + obs_dim_ + exo_dim_ : 0; }
  Eigen::Index aux_dim() const;
  Eigen::Index history() const { return h_; }
  Eigen::Index obs_dim() const { return obs_dim_; }
  Eigen::Index exo_dim() const { return exo_dim_; }
  Eigen::Index full_dim() const { return full_dim_; }

  FeatureBatch encode(std::span<const AugmentedState* const> xs, std::span<const Action> us) const;
  FeatureBatch encode(const AugmentedState& x, Action u) const;

 private:
  void write(const AugmentedState& x, Action u, Eigen::Index col, FeatureBatch& out) const;

  StateView view_ = StateView::Partial;
  Eigen::Index h_ = 1;
  Eigen::Index obs_dim_ = 0;
  Eigen::Index exo_dim_ = 0;
  Eigen::Index full_dim_ = 0;
};

/// Per-feature min-max scaling to [0, 1]. History channels share one range
/// across all time steps. Constant features map to 0.
class MinMaxScaler {
 public:
  void fit(const FeatureBatch& batch);
  void transform(FeatureBatch& batch) const;
  bool fitted() const { return fitted_; }

  const Eigen::VectorXd& seq_min() const { return seq_min_; }
  const Eigen::VectorXd& seq_range() const { return seq_range_; }
  const Eigen::VectorXd& aux_min() const { return aux_min_; }
  const Eigen::VectorXd& aux_range() const { return aux_range_; }
  void set(Eigen::VectorXd seq_min, Eigen::VectorXd seq_range, Eigen::VectorXd aux_min, Eigen::VectorXd aux_range);

 private:
  bool fitted_ = false;
  Eigen::VectorXd seq_min_, seq_range_, aux_min_, aux_range_;
};

}  // namespace tclrl
