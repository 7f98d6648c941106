#ifndef SAMPLECNN_NN_LOSS_HPP
#define SAMPLECNN_NN_LOSS_HPP

#include <cmath>

#include "samplecnn/core/error.hpp"
#include "samplecnn/core/types.hpp"

namespace samplecnn {

template <typename Scalar>
struct BceResult {
  double loss = 0.0;
  Matrix<Scalar> dlogits; // gradient wrt pre-sigmoid logits
};

/// Binary cross entropy, mean over every (tag, item) entry.
/// Probabilities are clamped to [1e-7, 1-1e-7] before the logs; the
/// logit gradient is (p - y) / n with n = number of entries.
template <typename Scalar>
BceResult<Scalar> bce_loss(const Matrix<Scalar>& pred, const Matrix<Scalar>& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw ShapeError("bce_loss: prediction/target shape mismatch");
  if (pred.size() == 0) throw ShapeError("bce_loss: empty prediction");

  const double eps = 1e-7;
  const auto p = pred.template cast<double>().array().max(eps).min(1.0 - eps);
  const auto y = target.template cast<double>().array();

  BceResult<Scalar> r;
  r.loss = -(y * p.log() + (1.0 - y) * (1.0 - p).log()).mean();
  r.dlogits = ((p - y) / static_cast<double>(pred.size())).template cast<Scalar>().matrix();
  return r;
}

} // namespace samplecnn

#endif
