#ifndef SAMPLECNN_NN_CONV1D_HPP
#define SAMPLECNN_NN_CONV1D_HPP

#include <string>

#include "samplecnn/core/error.hpp"
#include "samplecnn/core/types.hpp"

namespace samplecnn {

/// 1D convolution parameters. weight is (out_ch x filter_len*in_ch) with
/// tap-major columns: column k*in_ch + i holds tap k of input channel i,
/// so weight.middleCols(k*in_ch, in_ch) is the (out x in) matrix of tap k.
/// The canonical serialized order is (out, in, tap).
template <typename Scalar>
struct ConvParams {
  Matrix<Scalar> weight;
  Vector<Scalar> bias;
  int in_channels = 1;
  int filter_len = 1;
  int stride = 1;
  bool zero_pad = false;

  int out_channels() const { return static_cast<int>(weight.rows()); }

  Scalar& w(int out, int in, int tap) { return weight(out, tap * in_channels + in); }
  Scalar w(int out, int in, int tap) const { return weight(out, tap * in_channels + in); }
};

template <typename Scalar>
ConvParams<Scalar> make_conv(int out_ch, int in_ch, int filter_len, int stride,
                             bool zero_pad) {
  ConvParams<Scalar> p;
  p.in_channels = in_ch;
  p.filter_len = filter_len;
  p.stride = stride;
  p.zero_pad = zero_pad;
  p.weight = Matrix<Scalar>::Zero(out_ch, static_cast<Index>(filter_len) * in_ch);
  p.bias = Vector<Scalar>::Zero(out_ch);
  return p;
}

/// Output length; same-padding keeps out = ceil(in / stride).
template <typename Scalar>
Index conv1d_out_len(Index in_time, const ConvParams<Scalar>& p) {
  if (p.zero_pad) return (in_time + p.stride - 1) / p.stride;
  if (in_time < p.filter_len)
    throw ShapeError("conv1d: input time " + std::to_string(in_time) +
                     " shorter than filter " + std::to_string(p.filter_len));
  return (in_time - p.filter_len) / p.stride + 1;
}

/// Leading zero pad: floor((filter_len-1)/2), clamped to the total.
template <typename Scalar>
Index conv1d_left_pad(Index in_time, const ConvParams<Scalar>& p) {
  if (!p.zero_pad) return 0;
  const Index out_time = conv1d_out_len(in_time, p);
  const Index pad_total =
      std::max<Index>(0, (out_time - 1) * p.stride + p.filter_len - in_time);
  return std::min<Index>((p.filter_len - 1) / 2, pad_total);
}

/// out[o,t] = bias[o] + sum_{i,k} w[o,i,k] * x[i, t*stride + k - left_pad].
/// One GEMM per filter tap over the valid output range.
template <typename Scalar>
FeatureMap<Scalar> conv1d_forward(const FeatureMap<Scalar>& x, const ConvParams<Scalar>& p) {
  if (x.rows() != p.in_channels)
    throw ShapeError("conv1d: input has " + std::to_string(x.rows()) +
                     " channels, expected " + std::to_string(p.in_channels));
  const Index in_time = x.cols();
  const Index out_time = conv1d_out_len(in_time, p);
  const Index lp = conv1d_left_pad(in_time, p);

  FeatureMap<Scalar> out(p.out_channels(), out_time);
  out.colwise() = p.bias;

  for (int k = 0; k < p.filter_len; ++k) {
    const Index shift = k - lp;
    // valid t: 0 <= t*stride + shift < in_time
    Index t0 = 0;
    if (shift < 0) t0 = (-shift + p.stride - 1) / p.stride;
    const Index last_in = in_time - 1 - shift;
    if (last_in < 0) continue;
    const Index t1 = std::min(out_time - 1, last_in / p.stride);
    if (t1 < t0) continue;
    const Index count = t1 - t0 + 1;

    const auto wk = p.weight.middleCols(static_cast<Index>(k) * p.in_channels, p.in_channels);
    Eigen::Map<const Matrix<Scalar>, 0, Eigen::OuterStride<>> xs(
        x.data() + (t0 * p.stride + shift) * x.rows(), x.rows(), count,
        Eigen::OuterStride<>(static_cast<Index>(p.stride) * x.rows()));
    out.middleCols(t0, count).noalias() += wk * xs;
  }
  return out;
}

template <typename Scalar>
struct ConvGrads {
  Matrix<Scalar> dweight;
  Vector<Scalar> dbias;
  FeatureMap<Scalar> dinput;
};

/// Gradients of conv1d_forward; dweight/dbias/dinput mirror parameter
/// and input shapes.
template <typename Scalar>
ConvGrads<Scalar> conv1d_backward(const FeatureMap<Scalar>& x, const ConvParams<Scalar>& p,
                                  const FeatureMap<Scalar>& upstream) {
  const Index in_time = x.cols();
  const Index out_time = conv1d_out_len(in_time, p);
  if (upstream.rows() != p.out_channels() || upstream.cols() != out_time)
    throw ShapeError("conv1d_backward: upstream shape mismatch");
  const Index lp = conv1d_left_pad(in_time, p);

  ConvGrads<Scalar> g;
  g.dweight = Matrix<Scalar>::Zero(p.weight.rows(), p.weight.cols());
  g.dbias = upstream.rowwise().sum();
  g.dinput = FeatureMap<Scalar>::Zero(x.rows(), in_time);

  for (int k = 0; k < p.filter_len; ++k) {
    const Index shift = k - lp;
    Index t0 = 0;
    if (shift < 0) t0 = (-shift + p.stride - 1) / p.stride;
    const Index last_in = in_time - 1 - shift;
    if (last_in < 0) continue;
    const Index t1 = std::min(out_time - 1, last_in / p.stride);
    if (t1 < t0) continue;
    const Index count = t1 - t0 + 1;

    Eigen::Map<const Matrix<Scalar>, 0, Eigen::OuterStride<>> xs(
        x.data() + (t0 * p.stride + shift) * x.rows(), x.rows(), count,
        Eigen::OuterStride<>(static_cast<Index>(p.stride) * x.rows()));
    const auto up = upstream.middleCols(t0, count);
    g.dweight.middleCols(static_cast<Index>(k) * p.in_channels, p.in_channels).noalias() +=
        up * xs.transpose();

    const auto wk = p.weight.middleCols(static_cast<Index>(k) * p.in_channels, p.in_channels);
    Eigen::Map<Matrix<Scalar>, 0, Eigen::OuterStride<>> dxs(
        g.dinput.data() + (t0 * p.stride + shift) * x.rows(), x.rows(), count,
        Eigen::OuterStride<>(static_cast<Index>(p.stride) * x.rows()));
    dxs.noalias() += wk.transpose() * up;
  }
  return g;
}

} // namespace samplecnn

#endif
