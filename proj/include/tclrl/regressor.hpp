#pragma once

// Q-function approximators behind one fit/predict interface, and QModel, which
// couples an approximator with the state encoder and the frozen input scaler.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "tclrl/extra_trees.hpp"
#include "tclrl/features.hpp"
#include "tclrl/mdp.hpp"

namespace tclrl {

struct TrainConfig {
  double lr = 1e-3;
  double rho = 0.9;
  double eps = 1e-8;
  int minibatch = 32;
  int epochs = 20;
  bool warm_start = true;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Everything needed to build any approximator for a given input layout.
struct ApproxConfig {
  std::string kind = "lstm";  // mlp | cnn | lstm | trees
  TrainConfig train;
  ExtraTreesConfig trees;
  std::vector<Eigen::Index> mlp_hidden{50, 50, 50};
  Eigen::Index cnn_filters = 8;
  Eigen::Index cnn_width = 4;
  Eigen::Index cnn_aux_hidden = 20;
  Eigen::Index lstm_cell = 8;
  Eigen::Index head_hidden = 20;  // both dense head layers of the CNN and LSTM
};

inline constexpr std::string_view kApproxKinds[] = {"mlp", "cnn", "lstm", "trees"};
bool is_approx_kind(std::string_view name);

class Regressor {
 public:
  virtual ~Regressor() = default;
  virtual std::string kind() const = 0;
  virtual bool trained() const = 0;
  /// Inputs must already be scaled.
  virtual void fit(const FeatureBatch& x, const Eigen::VectorXd& y) = 0;
  virtual Eigen::VectorXd predict(const FeatureBatch& x) const = 0;
  /// Mean training loss of the last epoch (NaN for non-gradient models).
  virtual double last_loss() const = 0;
  virtual nlohmann::json to_json() const = 0;
  virtual void from_json(const nlohmann::json& j) = 0;
};

std::unique_ptr<Regressor> make_regressor(const ApproxConfig& cfg);

/// Q-hat_0: zero everywhere.
class ZeroQ final : public QFunction {
 public:
  bool trained() const override { return true; }
  double predict(const AugmentedState&, Action) const override { return 0.0; }
};

class QModel final : public QFunction {
 public:
  QModel(Encoder encoder, ApproxConfig cfg);

  const Encoder& encoder() const { return encoder_; }
  const MinMaxScaler& scaler() const { return scaler_; }
  const ApproxConfig& config() const { return cfg_; }
  Regressor& regressor() { return *reg_; }
  const Regressor& regressor() const { return *reg_; }

  /// Fits the scaler on raw features; it stays frozen until the next call.
  void fit_scaler(const FeatureBatch& raw);
  /// Raw (unscaled) features.
  void fit(FeatureBatch raw, const Eigen::VectorXd& y);
  Eigen::VectorXd predict_batch(FeatureBatch raw) const;

  bool trained() const override { return reg_->trained(); }
  double predict(const AugmentedState& x, Action u) const override;

  nlohmann::json to_json(std::uint64_t config_hash = 0) const;
  static QModel from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path, std::uint64_t config_hash = 0) const;
  static QModel load(const std::filesystem::path& path);

 private:
  Encoder encoder_;
  ApproxConfig cfg_;
  MinMaxScaler scaler_;
  std::unique_ptr<Regressor> reg_;
};

}  // namespace tclrl
