#pragma once

#include <algorithm>
#include <cmath>

#include "tclrl/nn/layers.hpp"

namespace tclrl::nn {

template <typename Scalar = double>
class RmsProp {
 public:
  RmsProp(Scalar lr = Scalar(1e-3), Scalar rho = Scalar(0.9), Scalar eps = Scalar(1e-8))
      : lr_(lr), rho_(rho), eps_(eps) {}

  void step(Vector<Scalar>& params, const Vector<Scalar>& grad) {
    if (cache_.size() != params.size()) cache_ = Vector<Scalar>::Zero(params.size());
    cache_ = rho_ * cache_ + (Scalar(1) - rho_) * grad.cwiseAbs2();
    params.array() -= lr_ * grad.array() / (cache_.array().sqrt() + eps_);
  }

  void reset() { cache_.resize(0); }
  const Vector<Scalar>& cache() const { return cache_; }
  void set_cache(Vector<Scalar> c) { cache_ = std::move(c); }

 private:
  Scalar lr_, rho_, eps_;
  Vector<Scalar> cache_;
};

/// Largest relative discrepancy between reverse-mode gradients and central
/// finite differences over every parameter of `net`. Entries where both
/// gradients are below `floor` are compared on an absolute scale of `floor`.
template <typename Net>
double grad_check(Net& net, const Eigen::Ref<const Matrix<double>>& seq, const Eigen::Ref<const Matrix<double>>& aux,
                  const Eigen::Ref<const Vector<double>>& y, double step = 1e-5, double floor = 1e-6) {
  Vector<double> analytic;
  net.loss_and_gradient(seq, aux, y, analytic);
  Vector<double> scratch;
  auto& theta = net.params();
  double worst = 0.0;
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    const double saved = theta(k);
    theta(k) = saved + step;
    const double up = net.loss_and_gradient(seq, aux, y, scratch);
    theta(k) = saved - step;
    const double down = net.loss_and_gradient(seq, aux, y, scratch);
    theta(k) = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max({std::abs(analytic(k)), std::abs(numeric), floor});
    worst = std::max(worst, std::abs(analytic(k) - numeric) / denom);
  }
  return worst;
}

}  // namespace tclrl::nn
