#pragma once

// Extremely randomized regression trees: at each node, one uniformly drawn cut
// per candidate feature, keep the cut with the largest relative variance
// reduction, stop below n_min samples or on constant targets/inputs.

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace tclrl {

struct ExtraTreesConfig {
  int n_trees = 100;
  int n_min = 5;
  int k = 0;  // features tried per split; 0 = all non-constant ones
  std::uint64_t seed = 0;

  void validate() const;
};

class ExtraTrees {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;  // samples with x < threshold go left
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  using Tree = std::vector<Node>;

  ExtraTrees() = default;
  explicit ExtraTrees(ExtraTreesConfig cfg);

  /// x: samples x features.
  void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);
  bool trained() const { return !trees_.empty(); }

  double predict_one(const double* row, Eigen::Index stride) const;
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;

  const ExtraTreesConfig& config() const { return cfg_; }
  const std::vector<Tree>& trees() const { return trees_; }
  Eigen::Index num_features() const { return n_features_; }
  void set_trees(std::vector<Tree> trees, Eigen::Index n_features);

 private:
  Tree grow(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::uint64_t tree_index) const;

  ExtraTreesConfig cfg_;
  std::vector<Tree> trees_;
  Eigen::Index n_features_ = 0;
};

}  // namespace tclrl
