#ifndef SAMPLECNN_NN_OPTIMIZER_HPP
#define SAMPLECNN_NN_OPTIMIZER_HPP

#include "samplecnn/core/error.hpp"
#include "samplecnn/core/types.hpp"

namespace samplecnn {

/// SGD with Nesterov momentum in the lookahead-folded form:
///   v' = momentum * v - lr * g
///   theta' = theta + momentum * v' - lr * g
/// momentum = 0 reduces to plain SGD.
template <typename ParamT, typename GradT, typename Scalar>
void nesterov_step(ParamT& theta, const GradT& grad, ParamT& velocity, Scalar lr,
                   Scalar momentum) {
  if (theta.rows() != grad.rows() || theta.cols() != grad.cols() ||
      theta.rows() != velocity.rows() || theta.cols() != velocity.cols())
    throw ShapeError("nesterov_step: shape mismatch");
  velocity = momentum * velocity - lr * grad;
  theta += momentum * velocity - lr * grad;
}

} // namespace samplecnn

#endif
