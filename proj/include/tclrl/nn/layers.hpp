#pragma once

// Dense building blocks shared by the networks. Batches are column-major:
// one sample per column.

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace tclrl::nn {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Location of one weight matrix inside a flat parameter vector.
struct Block {
  Eigen::Index offset = 0;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
};

class ParamLayout {
 public:
  Block add(Eigen::Index rows, Eigen::Index cols) {
    Block b{size_, rows, cols};
    size_ += rows * cols;
    return b;
  }
  Eigen::Index size() const { return size_; }

 private:
  Eigen::Index size_ = 0;
};

template <typename Scalar>
Eigen::Map<Matrix<Scalar>> view(Vector<Scalar>& v, const Block& b) {
  return Eigen::Map<Matrix<Scalar>>(v.data() + b.offset, b.rows, b.cols);
}

template <typename Scalar>
Eigen::Map<const Matrix<Scalar>> view(const Vector<Scalar>& v, const Block& b) {
  return Eigen::Map<const Matrix<Scalar>>(v.data() + b.offset, b.rows, b.cols);
}

template <typename Derived>
typename Derived::PlainObject sigmoid(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return (Scalar(1) / (Scalar(1) + (-x.derived().array()).exp())).matrix();
}

template <typename Derived>
typename Derived::PlainObject tanh(const Eigen::MatrixBase<Derived>& x) {
  return x.derived().array().tanh().matrix();
}

template <typename Derived>
typename Derived::PlainObject relu(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return x.derived().cwiseMax(Scalar(0));
}

/// Zeroes `grad` wherever the forward pre-activation was not positive.
template <typename DerivedG, typename DerivedZ>
void relu_backward(Eigen::MatrixBase<DerivedG>& grad, const Eigen::MatrixBase<DerivedZ>& pre) {
  using Scalar = typename DerivedG::Scalar;
  grad = (pre.array() > Scalar(0)).select(grad, Scalar(0));
}

/// W x + b broadcast over the batch.
template <typename Scalar, typename DerivedW, typename DerivedB, typename DerivedX>
Matrix<Scalar> affine(const Eigen::MatrixBase<DerivedW>& w, const Eigen::MatrixBase<DerivedB>& b,
                      const Eigen::MatrixBase<DerivedX>& x) {
  Matrix<Scalar> z = w * x;
  z.colwise() += b.col(0);
  return z;
}

/// Glorot-uniform weights, zero biases.
template <typename Scalar>
void glorot_uniform(Eigen::Map<Matrix<Scalar>> w, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (Eigen::Index j = 0; j < w.cols(); ++j)
    for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = static_cast<Scalar>(dist(rng));
}

/// Dense layer cache for backprop.
template <typename Scalar>
struct DenseCache {
  Matrix<Scalar> input;
  Matrix<Scalar> pre;
};

/// Chain of fully connected layers with ReLU activations; the last layer is
/// linear when `linear_output` is set.
template <typename Scalar>
class DenseStack {
 public:
  using Mat = Matrix<Scalar>;
  using Vec = Vector<Scalar>;

  DenseStack() = default;
  DenseStack(ParamLayout& layout, const std::vector<Eigen::Index>& widths, bool linear_output)
      : linear_output_(linear_output) {
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
      w_.push_back(layout.add(widths[l + 1], widths[l]));
      b_.push_back(layout.add(widths[l + 1], 1));
    }
  }

  std::size_t depth() const { return w_.size(); }
  const Block& weight(std::size_t l) const { return w_[l]; }
  const Block& bias(std::size_t l) const { return b_[l]; }

  void init(Vec& params, std::mt19937_64& rng) const {
    for (std::size_t l = 0; l < w_.size(); ++l) {
      glorot_uniform<Scalar>(view(params, w_[l]), rng);
      view(params, b_[l]).setZero();
    }
  }

  Mat forward(const Vec& params, const Mat& x, std::vector<DenseCache<Scalar>>* caches) const {
    Mat a = x;
    if (caches) caches->clear();
    for (std::size_t l = 0; l < w_.size(); ++l) {
      Mat pre = affine<Scalar>(view(params, w_[l]), view(params, b_[l]), a);
      Mat out = (is_linear(l)) ? pre : relu(pre);
      if (caches) caches->push_back({std::move(a), std::move(pre)});
      a = std::move(out);
    }
    return a;
  }

  /// Accumulates parameter gradients into `grad` and returns dLoss/dinput.
  Mat backward(const Vec& params, Vec& grad, const std::vector<DenseCache<Scalar>>& caches, Mat d) const {
    for (std::size_t k = w_.size(); k-- > 0;) {
      if (!is_linear(k)) relu_backward(d, caches[k].pre);
      view(grad, w_[k]).noalias() += d * caches[k].input.transpose();
      view(grad, b_[k]) += d.rowwise().sum();
      d = view(params, w_[k]).transpose() * d;
    }
    return d;
  }

 private:
  bool is_linear(std::size_t l) const { return linear_output_ && l + 1 == w_.size(); }

  bool linear_output_ = true;
  std::vector<Block> w_, b_;
};

}  // namespace tclrl::nn
