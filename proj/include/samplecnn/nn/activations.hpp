#ifndef SAMPLECNN_NN_ACTIVATIONS_HPP
#define SAMPLECNN_NN_ACTIVATIONS_HPP

#include "samplecnn/core/types.hpp"

namespace samplecnn {

template <typename Scalar>
FeatureMap<Scalar> relu(const FeatureMap<Scalar>& x) {
  return x.cwiseMax(Scalar(0));
}

/// activated may be either the pre-activation or the ReLU output; the
/// mask value > 0 is the same for both.
template <typename Scalar>
FeatureMap<Scalar> relu_backward(const FeatureMap<Scalar>& activated,
                                 const FeatureMap<Scalar>& upstream) {
  return (activated.array() > Scalar(0))
      .select(upstream, FeatureMap<Scalar>::Zero(upstream.rows(), upstream.cols()));
}

template <typename Scalar>
FeatureMap<Scalar> sigmoid(const FeatureMap<Scalar>& x) {
  return (Scalar(1) / (Scalar(1) + (-x.array()).exp())).matrix();
}

/// Gradient through sigmoid given its output s: s*(1-s)*upstream.
template <typename Scalar>
FeatureMap<Scalar> sigmoid_backward(const FeatureMap<Scalar>& sig_out,
                                    const FeatureMap<Scalar>& upstream) {
  return (sig_out.array() * (Scalar(1) - sig_out.array()) * upstream.array()).matrix();
}

} // namespace samplecnn

#endif
