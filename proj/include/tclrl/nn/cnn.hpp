#pragma once

// Merged 1D-CNN Q-network. The history (one row block per time step, `channels`
// values each) passes through two valid convolutions along time, each followed
// by ReLU and width-2 average pooling. The auxiliary inputs go through one dense
// ReLU layer; both branches are concatenated and fed to a dense head.

#include <random>
#include <stdexcept>
#include <vector>

#include "tclrl/nn/layers.hpp"

namespace tclrl::nn {

/// Valid 1D convolution along time.
///
/// `input` stacks `length` blocks of `channels` rows (block t = time step t);
/// `kernel` is filters x (width * channels) with column l * channels + c.
/// Returns (length - width + 1) blocks of `filters` rows.
template <typename Scalar, typename DI, typename DK, typename DB>
Matrix<Scalar> conv1d_valid(const Eigen::MatrixBase<DI>& input, const Eigen::MatrixBase<DK>& kernel,
                            const Eigen::MatrixBase<DB>& bias, Eigen::Index channels) {
  const Eigen::Index filters = kernel.rows();
  const Eigen::Index width = kernel.cols() / channels;
  const Eigen::Index length = input.rows() / channels;
  if (kernel.cols() != width * channels || input.rows() != length * channels || bias.rows() != filters)
    throw std::invalid_argument("conv1d_valid: inconsistent shapes");
  const Eigen::Index out_len = length - width + 1;
  if (out_len < 1) throw std::invalid_argument("conv1d_valid: input shorter than the kernel");
  Matrix<Scalar> out(out_len * filters, input.cols());
  for (Eigen::Index p = 0; p < out_len; ++p) {
    auto block = out.middleRows(p * filters, filters);
    block.noalias() = kernel * input.middleRows(p * channels, width * channels);
    block.colwise() += bias.col(0);
  }
  return out;
}

/// Width-2, stride-2 average pooling over time blocks; a trailing odd block is dropped.
template <typename Scalar>
Matrix<Scalar> avg_pool2(const Matrix<Scalar>& x, Eigen::Index channels) {
  const Eigen::Index out_len = x.rows() / channels / 2;
  Matrix<Scalar> out(out_len * channels, x.cols());
  for (Eigen::Index j = 0; j < out_len; ++j)
    out.middleRows(j * channels, channels) =
        Scalar(0.5) * (x.middleRows(2 * j * channels, channels) + x.middleRows((2 * j + 1) * channels, channels));
  return out;
}

struct CnnShape {
  Eigen::Index seq_len = 20;
  Eigen::Index channels = 3;
  Eigen::Index d_aux = 1;
  Eigen::Index filters = 8;
  Eigen::Index width = 4;
  Eigen::Index aux_hidden = 20;
  Eigen::Index hidden1 = 20;
  Eigen::Index hidden2 = 20;

  Eigen::Index conv1_len() const { return seq_len - width + 1; }
  Eigen::Index pool1_len() const { return conv1_len() / 2; }
  Eigen::Index conv2_len() const { return pool1_len() - width + 1; }
  Eigen::Index pool2_len() const { return conv2_len() / 2; }
};

template <typename Scalar = double>
class CnnNet {
 public:
  using Mat = Matrix<Scalar>;
  using Vec = Vector<Scalar>;

  explicit CnnNet(const CnnShape& shape) : shape_(shape) {
    if (shape.conv1_len() < 1 || shape.conv2_len() < 1 || shape.pool2_len() < 1)
      throw std::invalid_argument("CnnNet: history too short for two conv/pool stages");
    k1_ = layout_.add(shape.filters, shape.width * shape.channels);
    b1_ = layout_.add(shape.filters, 1);
    k2_ = layout_.add(shape.filters, shape.width * shape.filters);
    b2_ = layout_.add(shape.filters, 1);
    aux_ = DenseStack<Scalar>(layout_, {shape.d_aux, shape.aux_hidden}, false);
    head_ = DenseStack<Scalar>(
        layout_, {shape.pool2_len() * shape.filters + shape.aux_hidden, shape.hidden1, shape.hidden2, 1}, true);
    params_ = Vec::Zero(layout_.size());
  }

  const CnnShape& shape() const { return shape_; }
  Eigen::Index num_params() const { return layout_.size(); }
  Vec& params() { return params_; }
  const Vec& params() const { return params_; }
  const Block& conv1_kernel() const { return k1_; }
  const Block& conv1_bias() const { return b1_; }
  const DenseStack<Scalar>& head() const { return head_; }
  const DenseStack<Scalar>& aux_branch() const { return aux_; }

  void init(std::mt19937_64& rng) {
    params_.setZero();
    glorot_uniform<Scalar>(view(params_, k1_), rng);
    glorot_uniform<Scalar>(view(params_, k2_), rng);
    aux_.init(params_, rng);
    head_.init(params_, rng);
  }

  Vec forward(const Eigen::Ref<const Mat>& seq, const Eigen::Ref<const Mat>& aux) const {
    return run(seq, aux, nullptr);
  }

  Scalar loss_and_gradient(const Eigen::Ref<const Mat>& seq, const Eigen::Ref<const Mat>& aux,
                           const Eigen::Ref<const Vec>& y, Vec& grad) const {
    Cache cache;
    const Vec q = run(seq, aux, &cache);
    const Vec err = q - y;
    const Eigen::Index batch = q.size();
    grad = Vec::Zero(layout_.size());
    const Mat d_merge = head_.backward(params_, grad, cache.head,
                                       (Scalar(2) / static_cast<Scalar>(batch)) * err.transpose());
    const Eigen::Index f = shape_.filters;
    const Eigen::Index conv_rows = shape_.pool2_len() * f;
    aux_.backward(params_, grad, cache.aux, d_merge.bottomRows(shape_.aux_hidden));

    // Second conv stage.
    Mat d_relu2 = unpool2(d_merge.topRows(conv_rows), shape_.conv2_len(), f);
    relu_backward(d_relu2, cache.z2);
    Mat d_pool1 = conv_backward(d_relu2, cache.p1, k2_, b2_, f, grad);

    // First conv stage.
    Mat d_relu1 = unpool2(d_pool1, shape_.conv1_len(), f);
    relu_backward(d_relu1, cache.z1);
    conv_backward(d_relu1, seq, k1_, b1_, shape_.channels, grad);
    return err.squaredNorm() / static_cast<Scalar>(batch);
  }

 private:
  struct Cache {
    Mat z1, p1, z2;
    std::vector<DenseCache<Scalar>> aux, head;
  };

  Vec run(const Eigen::Ref<const Mat>& seq, const Eigen::Ref<const Mat>& aux, Cache* cache) const {
    if (seq.rows() != shape_.seq_len * shape_.channels || aux.rows() != shape_.d_aux || seq.cols() != aux.cols())
      throw std::invalid_argument("CnnNet: input dimensions do not match the network");
    const Eigen::Index f = shape_.filters;
    Mat z1 = conv1d_valid<Scalar>(seq, view(params_, k1_), view(params_, b1_), shape_.channels);
    Mat p1 = avg_pool2<Scalar>(relu(z1), f);
    Mat z2 = conv1d_valid<Scalar>(p1, view(params_, k2_), view(params_, b2_), f);
    const Mat p2 = avg_pool2<Scalar>(relu(z2), f);
    const Mat a = aux_.forward(params_, aux, cache ? &cache->aux : nullptr);
    Mat merged(p2.rows() + a.rows(), seq.cols());
    merged << p2, a;
    const Mat out = head_.forward(params_, merged, cache ? &cache->head : nullptr);
    if (cache) {
      cache->z1 = std::move(z1);
      cache->p1 = std::move(p1);
      cache->z2 = std::move(z2);
    }
    return out.row(0).transpose();
  }

  // Gradient of avg_pool2 back to a length `len` block sequence.
  static Mat unpool2(const Mat& d, Eigen::Index len, Eigen::Index channels) {
    Mat out = Mat::Zero(len * channels, d.cols());
    for (Eigen::Index j = 0; j < d.rows() / channels; ++j) {
      const auto g = Scalar(0.5) * d.middleRows(j * channels, channels);
      out.middleRows(2 * j * channels, channels) = g;
      out.middleRows((2 * j + 1) * channels, channels) = g;
    }
    return out;
  }

  // Accumulates kernel/bias gradients and returns dLoss/dinput.
  Mat conv_backward(const Mat& d_out, const Eigen::Ref<const Mat>& input, const Block& kb, const Block& bb,
                    Eigen::Index channels, Vec& grad) const {
    const Eigen::Index f = kb.rows;
    const Eigen::Index width = kb.cols / channels;
    const auto k = view(params_, kb);
    auto gk = view(grad, kb);
    auto gbias = view(grad, bb);
    Mat d_in = Mat::Zero(input.rows(), input.cols());
    for (Eigen::Index p = 0; p < d_out.rows() / f; ++p) {
      const auto d = d_out.middleRows(p * f, f);
      gk.noalias() += d * input.middleRows(p * channels, width * channels).transpose();
      gbias += d.rowwise().sum();
      d_in.middleRows(p * channels, width * channels).noalias() += k.transpose() * d;
    }
    return d_in;
  }

  CnnShape shape_;
  ParamLayout layout_;
  Block k1_, b1_, k2_, b2_;
  DenseStack<Scalar> aux_, head_;
  Vec params_;
};

}  // namespace tclrl::nn
