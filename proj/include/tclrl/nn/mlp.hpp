#pragma once

#include <random>
#include <stdexcept>
#include <vector>

#include "tclrl/nn/layers.hpp"

namespace tclrl::nn {

struct MlpShape {
  Eigen::Index seq_rows = 0;  // flattened history length (h * series), may be 0
  Eigen::Index d_aux = 1;
  std::vector<Eigen::Index> hidden = {50, 50, 50};
};

/// Fully connected Q-network on the flattened [history; aux] input.
template <typename Scalar = double>
class MlpNet {
 public:
  using Mat = Matrix<Scalar>;
  using Vec = Vector<Scalar>;

  explicit MlpNet(const MlpShape& shape) : shape_(shape) {
    std::vector<Eigen::Index> widths{shape.seq_rows + shape.d_aux};
    widths.insert(widths.end(), shape.hidden.begin(), shape.hidden.end());
    widths.push_back(1);
    stack_ = DenseStack<Scalar>(layout_, widths, true);
    params_ = Vec::Zero(layout_.size());
  }

  const MlpShape& shape() const { return shape_; }
  Eigen::Index num_params() const { return layout_.size(); }
  Vec& params() { return params_; }
  const Vec& params() const { return params_; }
  const DenseStack<Scalar>& stack() const { return stack_; }

  void init(std::mt19937_64& rng) { stack_.init(params_, rng); }

  Vec forward(const Eigen::Ref<const Mat>& seq, const Eigen::Ref<const Mat>& aux) const {
    return stack_.forward(params_, concat(seq, aux), nullptr).row(0).transpose();
  }

  Scalar loss_and_gradient(const Eigen::Ref<const Mat>& seq, const Eigen::Ref<const Mat>& aux,
                           const Eigen::Ref<const Vec>& y, Vec& grad) const {
    std::vector<DenseCache<Scalar>> caches;
    const Vec q = stack_.forward(params_, concat(seq, aux), &caches).row(0).transpose();
    const Vec err = q - y;
    const auto batch = static_cast<Scalar>(q.size());
    grad = Vec::Zero(layout_.size());
    stack_.backward(params_, grad, caches, (Scalar(2) / batch) * err.transpose());
    return err.squaredNorm() / batch;
  }

 private:
  Mat concat(const Eigen::Ref<const Mat>& seq, const Eigen::Ref<const Mat>& aux) const {
    if (seq.rows() != shape_.seq_rows || aux.rows() != shape_.d_aux || seq.cols() != aux.cols())
      throw std::invalid_argument("MlpNet: input dimensions do not match the network");
    Mat x(seq.rows() + aux.rows(), aux.cols());
    x << seq, aux;
    return x;
  }

  MlpShape shape_;
  ParamLayout layout_;
  DenseStack<Scalar> stack_;
  Vec params_;
};

}  // namespace tclrl::nn
