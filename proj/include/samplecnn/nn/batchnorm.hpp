#ifndef SAMPLECNN_NN_BATCHNORM_HPP
#define SAMPLECNN_NN_BATCHNORM_HPP

#include <type_traits>
#include <vector>

#include "samplecnn/core/error.hpp"
#include "samplecnn/core/types.hpp"

namespace samplecnn {

template <typename Scalar>
struct BatchNormParams {
  Vector<Scalar> gamma, beta;
  Vector<Scalar> running_mean, running_var;
  Scalar epsilon = static_cast<Scalar>(1e-5);
  Scalar momentum = static_cast<Scalar>(0.9); // running = m*running + (1-m)*batch

  Index channels() const { return gamma.size(); }
};

template <typename Scalar>
BatchNormParams<Scalar> make_batchnorm(int channels) {
  BatchNormParams<Scalar> p;
  p.gamma = Vector<Scalar>::Ones(channels);
  p.beta = Vector<Scalar>::Zero(channels);
  p.running_mean = Vector<Scalar>::Zero(channels);
  p.running_var = Vector<Scalar>::Ones(channels);
  return p;
}

template <typename Scalar>
struct BatchNormCache {
  std::vector<FeatureMap<Scalar>> xhat;
  Vector<Scalar> inv_std; // 1/sqrt(var + eps), batch statistics
};

/// Train-mode forward over a batch: per-channel statistics pooled over
/// batch and time, population variance, EMA update of the running stats.
template <typename Scalar>
std::vector<FeatureMap<Scalar>> batchnorm_forward_train(
    const std::vector<FeatureMap<Scalar>>& xs, BatchNormParams<Scalar>& p,
    std::type_identity_t<BatchNormCache<Scalar>>* cache = nullptr) {
  if (xs.empty()) throw ShapeError("batchnorm: empty batch");
  const Index ch = p.channels();
  Index total = 0;
  Vector<Scalar> mean = Vector<Scalar>::Zero(ch);
  for (const auto& x : xs) {
    if (x.rows() != ch) throw ShapeError("batchnorm: channel mismatch");
    mean += x.rowwise().sum();
    total += x.cols();
  }
  mean /= static_cast<Scalar>(total);

  Vector<Scalar> var = Vector<Scalar>::Zero(ch);
  for (const auto& x : xs)
    var += (x.colwise() - mean).array().square().matrix().rowwise().sum();
  var /= static_cast<Scalar>(total);

  p.running_mean = p.momentum * p.running_mean + (1 - p.momentum) * mean;
  p.running_var = p.momentum * p.running_var + (1 - p.momentum) * var;

  const Vector<Scalar> inv_std =
      (var.array() + p.epsilon).rsqrt().matrix();
  std::vector<FeatureMap<Scalar>> out;
  out.reserve(xs.size());
  if (cache) {
    cache->xhat.clear();
    cache->xhat.reserve(xs.size());
    cache->inv_std = inv_std;
  }
  for (const auto& x : xs) {
    FeatureMap<Scalar> xh =
        ((x.colwise() - mean).array().colwise() * inv_std.array()).matrix();
    FeatureMap<Scalar> y =
        ((xh.array().colwise() * p.gamma.array()).colwise() + p.beta.array()).matrix();
    if (cache) cache->xhat.push_back(std::move(xh));
    out.push_back(std::move(y));
  }
  return out;
}

/// Infer-mode forward using the running statistics.
template <typename Scalar>
FeatureMap<Scalar> batchnorm_forward_infer(const FeatureMap<Scalar>& x,
                                           const BatchNormParams<Scalar>& p) {
  if (x.rows() != p.channels()) throw ShapeError("batchnorm: channel mismatch");
  const Vector<Scalar> inv_std = (p.running_var.array() + p.epsilon).rsqrt().matrix();
  const Vector<Scalar> scale = (p.gamma.array() * inv_std.array()).matrix();
  const Vector<Scalar> shift =
      (p.beta.array() - p.running_mean.array() * scale.array()).matrix();
  return ((x.array().colwise() * scale.array()).colwise() + shift.array()).matrix();
}

template <typename Scalar>
struct BatchNormGrads {
  Vector<Scalar> dgamma, dbeta;
  std::vector<FeatureMap<Scalar>> dinputs;
};

/// Train-mode backward (batch statistics participate in the gradient).
template <typename Scalar>
BatchNormGrads<Scalar> batchnorm_backward(const BatchNormCache<Scalar>& cache,
                                          const BatchNormParams<Scalar>& p,
                                          const std::vector<FeatureMap<Scalar>>& upstream) {
  if (upstream.size() != cache.xhat.size())
    throw ShapeError("batchnorm_backward: batch size mismatch");
  const Index ch = p.channels();
  BatchNormGrads<Scalar> g;
  g.dgamma = Vector<Scalar>::Zero(ch);
  g.dbeta = Vector<Scalar>::Zero(ch);
  Index total = 0;
  for (std::size_t i = 0; i < upstream.size(); ++i) {
    if (upstream[i].rows() != ch || upstream[i].cols() != cache.xhat[i].cols())
      throw ShapeError("batchnorm_backward: upstream shape mismatch");
    g.dbeta += upstream[i].rowwise().sum();
    g.dgamma += upstream[i].cwiseProduct(cache.xhat[i]).rowwise().sum();
    total += upstream[i].cols();
  }

  // dx = (gamma * inv_std / N) * (N*up - dbeta - xhat * dgamma)
  const Vector<Scalar> coef =
      (p.gamma.array() * cache.inv_std.array() / static_cast<Scalar>(total)).matrix();
  g.dinputs.reserve(upstream.size());
  for (std::size_t i = 0; i < upstream.size(); ++i) {
    FeatureMap<Scalar> dx =
        (static_cast<Scalar>(total) * upstream[i].array() -
         (cache.xhat[i].array().colwise() * g.dgamma.array()))
            .matrix();
    dx.colwise() -= g.dbeta;
    dx = (dx.array().colwise() * coef.array()).matrix();
    g.dinputs.push_back(std::move(dx));
  }
  return g;
}

/// Infer-mode backward: running stats are constants, so the gradient is
/// a per-channel scale. Used by the filter-visualization ascent.
template <typename Scalar>
FeatureMap<Scalar> batchnorm_backward_infer(const BatchNormParams<Scalar>& p,
                                            const FeatureMap<Scalar>& upstream) {
  const Vector<Scalar> scale =
      (p.gamma.array() * (p.running_var.array() + p.epsilon).rsqrt()).matrix();
  return (upstream.array().colwise() * scale.array()).matrix();
}

} // namespace samplecnn

#endif
