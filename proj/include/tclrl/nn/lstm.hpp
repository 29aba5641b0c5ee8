#pragma once

// LSTM Q-network: an LSTM over the history sequence whose final hidden state is
// concatenated with the auxiliary inputs (time, exogenous, action) and passed
// through two ReLU layers and a linear output.

#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tclrl/nn/layers.hpp"

namespace tclrl::nn {

/// Separate gate parameters, each d_cell x (d_cell + d_in) acting on [h_prev; x].
template <typename Scalar = double>
struct LstmCellParams {
  Matrix<Scalar> w_f, w_i, w_o, w_c;
  Vector<Scalar> b_f, b_i, b_o, b_c;

  Eigen::Index d_cell() const { return w_f.rows(); }
  Eigen::Index d_in() const { return w_f.cols() - w_f.rows(); }
};

/// Activations of one LSTM step; columns are batch samples.
template <typename Scalar>
struct LstmStep {
  Matrix<Scalar> input;  // [h_prev; x]
  Matrix<Scalar> c_prev;
  Matrix<Scalar> f, i, o, g;
  Matrix<Scalar> c, tanh_c, h;
};

/// One step with stacked gate weights `w` (rows f, i, o, c) and bias `b`.
template <typename Scalar, typename DW, typename DB>
LstmStep<Scalar> lstm_step(const Eigen::MatrixBase<DW>& w, const Eigen::MatrixBase<DB>& b,
                           const Matrix<Scalar>& h_prev, const Matrix<Scalar>& c_prev,
                           const Eigen::Ref<const Matrix<Scalar>>& x) {
  const Eigen::Index hd = h_prev.rows();
  LstmStep<Scalar> s;
  s.input.resize(hd + x.rows(), x.cols());
  s.input << h_prev, x;
  const Matrix<Scalar> z = affine<Scalar>(w, b, s.input);
  s.f = sigmoid(z.topRows(hd));
  s.i = sigmoid(z.middleRows(hd, hd));
  s.o = sigmoid(z.middleRows(2 * hd, hd));
  s.g = tanh(z.bottomRows(hd));
  s.c_prev = c_prev;
  s.c = s.f.cwiseProduct(c_prev) + s.i.cwiseProduct(s.g);
  s.tanh_c = tanh(s.c);
  s.h = s.o.cwiseProduct(s.tanh_c);
  return s;
}

/// Single LSTM cell update. Returns (h_t, C_t).
template <typename Scalar>
std::pair<Vector<Scalar>, Vector<Scalar>> lstm_cell(const Vector<Scalar>& x, const Vector<Scalar>& h_prev,
                                                    const Vector<Scalar>& c_prev, const LstmCellParams<Scalar>& p) {
  const Eigen::Index hd = p.d_cell();
  const Eigen::Index in = hd + x.size();
  const Matrix<Scalar>* gates[] = {&p.w_f, &p.w_i, &p.w_o, &p.w_c};
  const Vector<Scalar>* biases[] = {&p.b_f, &p.b_i, &p.b_o, &p.b_c};
  for (int k = 0; k < 4; ++k) {
    if (gates[k]->rows() != hd || gates[k]->cols() != in || biases[k]->size() != hd)
      throw std::invalid_argument("lstm_cell: parameter shapes do not match d_cell/d_in");
  }
  if (h_prev.size() != hd || c_prev.size() != hd) throw std::invalid_argument("lstm_cell: state size mismatch");
  Matrix<Scalar> w(4 * hd, in);
  w << p.w_f, p.w_i, p.w_o, p.w_c;
  Vector<Scalar> b(4 * hd);
  b << p.b_f, p.b_i, p.b_o, p.b_c;
  const LstmStep<Scalar> s = lstm_step<Scalar>(w, b, Matrix<Scalar>(h_prev), Matrix<Scalar>(c_prev), x);
  return {s.h.col(0), s.c.col(0)};
}

struct LstmShape {
  Eigen::Index seq_len = 20;
  Eigen::Index d_in = 3;
  Eigen::Index d_cell = 8;
  Eigen::Index d_aux = 1;
  Eigen::Index hidden1 = 20;
  Eigen::Index hidden2 = 20;
};

template <typename Scalar = double>
class LstmNet {
 public:
  using Mat = Matrix<Scalar>;
  using Vec = Vector<Scalar>;

  explicit LstmNet(const LstmShape& shape) : shape_(shape) {
    const Eigen::Index hd = shape.d_cell;
    gates_ = layout_.add(4 * hd, hd + shape.d_in);
    gates_b_ = layout_.add(4 * hd, 1);
    head_ = DenseStack<Scalar>(layout_, {hd + shape.d_aux, shape.hidden1, shape.hidden2, 1}, true);
    params_ = Vec::Zero(layout_.size());
  }

  const LstmShape& shape() const { return shape_; }
  Eigen::Index num_params() const { return layout_.size(); }
  Vec& params() { return params_; }
  const Vec& params() const { return params_; }

  /// Glorot weights; forget-gate bias 1, other biases 0.
  void init(std::mt19937_64& rng) {
    params_.setZero();
    glorot_uniform<Scalar>(view(params_, gates_), rng);
    view(params_, gates_b_).topRows(shape_.d_cell).setConstant(Scalar(1));
    head_.init(params_, rng);
  }

  /// Gate parameters split per gate.
  LstmCellParams<Scalar> cell_params() const {
    const auto w = view(params_, gates_);
    const auto b = view(params_, gates_b_);
    const Eigen::Index hd = shape_.d_cell;
    return {w.middleRows(0, hd), w.middleRows(hd, hd), w.middleRows(2 * hd, hd), w.middleRows(3 * hd, hd),
            b.middleRows(0, hd), b.middleRows(hd, hd), b.middleRows(2 * hd, hd), b.middleRows(3 * hd, hd)};
  }

  const DenseStack<Scalar>& head() const { return head_; }

  /// seq: (seq_len * d_in) x B with block t holding x^(t+1); aux: d_aux x B.
  Vec forward(const Eigen::Ref<const Mat>& seq, const Eigen::Ref<const Mat>& aux) const {
    return run(seq, aux, nullptr);
  }

  /// Mean squared error over the batch; `grad` is overwritten with dLoss/dparams.
  Scalar loss_and_gradient(const Eigen::Ref<const Mat>& seq, const Eigen::Ref<const Mat>& aux,
                           const Eigen::Ref<const Vec>& y, Vec& grad) const {
    Cache cache;
    const Vec q = run(seq, aux, &cache);
    const Eigen::Index batch = q.size();
    const Vec err = q - y;
    grad = Vec::Zero(layout_.size());
    const Mat d_out = (Scalar(2) / static_cast<Scalar>(batch)) * err.transpose();
    const Mat d_merge = head_.backward(params_, grad, cache.head, d_out);

    const Eigen::Index hd = shape_.d_cell;
    const Scalar one(1);
    const auto w = view(params_, gates_);
    auto gw = view(grad, gates_);
    auto gb = view(grad, gates_b_);
    Mat dh = d_merge.topRows(hd);
    Mat dc = Mat::Zero(hd, batch);
    Mat dz(4 * hd, batch);
    for (auto it = cache.steps.rbegin(); it != cache.steps.rend(); ++it) {
      const LstmStep<Scalar>& s = *it;
      dc += dh.cwiseProduct(s.o).cwiseProduct((one - s.tanh_c.array().square()).matrix());
      dz.topRows(hd) = (dc.array() * s.c_prev.array() * s.f.array() * (one - s.f.array())).matrix();
      dz.middleRows(hd, hd) = (dc.array() * s.g.array() * s.i.array() * (one - s.i.array())).matrix();
      dz.middleRows(2 * hd, hd) = (dh.array() * s.tanh_c.array() * s.o.array() * (one - s.o.array())).matrix();
      dz.bottomRows(hd) = (dc.array() * s.i.array() * (one - s.g.array().square())).matrix();
      gw.noalias() += dz * s.input.transpose();
      gb += dz.rowwise().sum();
      dh = (w.transpose() * dz).topRows(hd);
      dc = dc.cwiseProduct(s.f);
    }
    return err.squaredNorm() / static_cast<Scalar>(batch);
  }

 private:
  struct Cache {
    std::vector<LstmStep<Scalar>> steps;
    std::vector<DenseCache<Scalar>> head;
  };

  Vec run(const Eigen::Ref<const Mat>& seq, const Eigen::Ref<const Mat>& aux, Cache* cache) const {
    const Eigen::Index batch = seq.cols();
    if (seq.rows() != shape_.seq_len * shape_.d_in)
      throw std::invalid_argument("LstmNet: sequence has the wrong length or width");
    if (aux.rows() != shape_.d_aux || aux.cols() != batch)
      throw std::invalid_argument("LstmNet: auxiliary input has the wrong shape");
    const Eigen::Index hd = shape_.d_cell;
    const auto w = view(params_, gates_);
    const auto b = view(params_, gates_b_);
    Mat h = Mat::Zero(hd, batch);
    Mat c = Mat::Zero(hd, batch);
    if (cache) cache->steps.reserve(static_cast<std::size_t>(shape_.seq_len));
    for (Eigen::Index t = 0; t < shape_.seq_len; ++t) {
      LstmStep<Scalar> s = lstm_step<Scalar>(w, b, h, c, seq.middleRows(t * shape_.d_in, shape_.d_in));
      h = s.h;
      c = s.c;
      if (cache) cache->steps.push_back(std::move(s));
    }
    Mat merged(hd + shape_.d_aux, batch);
    merged << h, aux;
    const Mat out = head_.forward(params_, merged, cache ? &cache->head : nullptr);
    return out.row(0).transpose();
  }

  LstmShape shape_;
  ParamLayout layout_;
  Block gates_, gates_b_;
  DenseStack<Scalar> head_;
  Vec params_;
};

}  // namespace tclrl::nn
