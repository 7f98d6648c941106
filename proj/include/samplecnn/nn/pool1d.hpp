#ifndef SAMPLECNN_NN_POOL1D_HPP
#define SAMPLECNN_NN_POOL1D_HPP

#include <string>

#include "samplecnn/core/error.hpp"
#include "samplecnn/core/types.hpp"

namespace samplecnn {

template <typename Scalar>
struct PoolResult {
  FeatureMap<Scalar> out;
  IndexMatrix argmax; // absolute input time index per (channel, window)
};

/// Non-overlapping max pooling; pool_len must divide the time length.
/// Ties go to the earliest index.
template <typename Scalar>
PoolResult<Scalar> maxpool1d_forward(const FeatureMap<Scalar>& x, int pool_len) {
  if (pool_len < 1) throw ConfigError("maxpool1d: pool_len must be >= 1");
  if (x.cols() % pool_len != 0)
    throw ShapeError("maxpool1d: time " + std::to_string(x.cols()) +
                     " not divisible by pool " + std::to_string(pool_len));
  const Index out_time = x.cols() / pool_len;
  PoolResult<Scalar> r;
  r.out.resize(x.rows(), out_time);
  r.argmax.resize(x.rows(), out_time);
  for (Index t = 0; t < out_time; ++t) {
    for (Index c = 0; c < x.rows(); ++c) {
      Index best = t * pool_len;
      Scalar best_v = x(c, best);
      for (int j = 1; j < pool_len; ++j) {
        const Scalar v = x(c, t * pool_len + j);
        if (v > best_v) {
          best_v = v;
          best = t * pool_len + j;
        }
      }
      r.out(c, t) = best_v;
      r.argmax(c, t) = static_cast<int>(best);
    }
  }
  return r;
}

/// Routes each upstream value to its stored argmax position.
template <typename Scalar>
FeatureMap<Scalar> maxpool1d_backward(const IndexMatrix& argmax, Index in_time,
                                      const FeatureMap<Scalar>& upstream) {
  if (upstream.rows() != argmax.rows() || upstream.cols() != argmax.cols())
    throw ShapeError("maxpool1d_backward: upstream shape mismatch");
  FeatureMap<Scalar> dx = FeatureMap<Scalar>::Zero(upstream.rows(), in_time);
  for (Index t = 0; t < upstream.cols(); ++t)
    for (Index c = 0; c < upstream.rows(); ++c)
      dx(c, argmax(c, t)) += upstream(c, t);
  return dx;
}

} // namespace samplecnn

#endif
