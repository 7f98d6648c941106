#ifndef SAMPLECNN_MODEL_NETWORK_HPP
#define SAMPLECNN_MODEL_NETWORK_HPP

#include <cmath>
#include <optional>
#include <type_traits>
#include <random>
#include <vector>

#include "samplecnn/core/parallel.hpp"
#include "samplecnn/core/rng.hpp"
#include "samplecnn/model/spec.hpp"
#include "samplecnn/nn/activations.hpp"
#include "samplecnn/nn/batchnorm.hpp"
#include "samplecnn/nn/conv1d.hpp"
#include "samplecnn/nn/dropout.hpp"
#include "samplecnn/nn/loss.hpp"
#include "samplecnn/nn/optimizer.hpp"
#include "samplecnn/nn/pool1d.hpp"

namespace samplecnn {

template <typename Scalar>
struct LayerParams {
  ConvParams<Scalar> conv;
  std::optional<BatchNormParams<Scalar>> bn; // absent on the output layer
};

template <typename Scalar>
struct ParamSet {
  std::vector<LayerParams<Scalar>> layers;
};

/// Glorot-uniform conv weights, zero biases, identity batch norm,
/// running stats {0, 1}. Deterministic in the seed.
template <typename Scalar>
ParamSet<Scalar> init_params(const ModelSpec& spec, std::uint64_t seed) {
  const ModelSpec s = resolve_spec(spec);
  const auto layers = build_mn(s);
  ParamSet<Scalar> params;
  params.layers.reserve(layers.size());
  int in_ch = input_channels(s);
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const auto& l = layers[li];
    LayerParams<Scalar> lp;
    lp.conv = make_conv<Scalar>(l.out_channels, in_ch, l.filter_len, l.stride,
                                /*zero_pad=*/l.kind == LayerKind::StridedConv ||
                                    l.kind == LayerKind::ConvBlock);
    const double fan_in = static_cast<double>(in_ch) * l.filter_len;
    const double fan_out = static_cast<double>(l.out_channels) * l.filter_len;
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    auto rng = make_rng(seed, static_cast<std::uint64_t>(li));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Index c = 0; c < lp.conv.weight.cols(); ++c)
      for (Index r = 0; r < lp.conv.weight.rows(); ++r)
        lp.conv.weight(r, c) = static_cast<Scalar>(u(rng));
    if (l.kind != LayerKind::OutputDense)
      lp.bn = make_batchnorm<Scalar>(l.out_channels);
    params.layers.push_back(std::move(lp));
    in_ch = l.out_channels;
  }
  return params;
}

enum class Mode { Train, Infer };

template <typename Scalar>
struct LayerCache {
  std::vector<FeatureMap<Scalar>> conv_in;   // per item
  std::vector<FeatureMap<Scalar>> relu_out;  // pre-pool, per item
  BatchNormCache<Scalar> bn;
  std::vector<IndexMatrix> pool_idx;
  std::vector<Index> pre_pool_time;
  std::vector<FeatureMap<Scalar>> drop_mask;
};

template <typename Scalar>
struct ForwardCache {
  std::vector<LayerCache<Scalar>> layers;
};

/// Forward pass over a batch of (channels x time) inputs; returns one
/// probability vector (n_tags) per item. Train mode fills the cache and
/// applies dropout with masks drawn in item order from rng.
template <typename Scalar>
std::vector<Vector<Scalar>> forward(const std::vector<LayerSpec>& layers,
                                    ParamSet<Scalar>& params,
                                    const std::vector<FeatureMap<Scalar>>& batch,
                                    Mode mode,
                                    std::type_identity_t<ForwardCache<Scalar>>* cache = nullptr,
                                    std::mt19937_64* rng = nullptr,
                                    double dropout_rate = 0.0, int threads = 1) {
  if (batch.empty()) throw ShapeError("forward: empty batch");
  if (cache) cache->layers.assign(layers.size(), LayerCache<Scalar>{});
  const bool train = mode == Mode::Train;
  if (train && dropout_rate > 0 && rng == nullptr)
    throw ConfigError("forward: train mode with dropout needs an rng");

  std::vector<FeatureMap<Scalar>> acts = batch;
  const std::size_t n_items = batch.size();

  for (std::size_t li = 0; li < layers.size(); ++li) {
    const LayerSpec& l = layers[li];
    LayerParams<Scalar>& lp = params.layers[li];
    LayerCache<Scalar>* lc = cache ? &cache->layers[li] : nullptr;

    if (lc) lc->conv_in = acts;
    std::vector<FeatureMap<Scalar>> next(n_items);
    parallel_for(static_cast<int>(n_items), threads, [&](int i) {
      next[static_cast<std::size_t>(i)] =
          conv1d_forward(acts[static_cast<std::size_t>(i)], lp.conv);
    });
    acts = std::move(next);

    if (lp.bn) {
      if (train) {
        acts = batchnorm_forward_train(acts, *lp.bn, lc ? &lc->bn : nullptr);
      } else {
        std::vector<FeatureMap<Scalar>> bn_out(n_items);
        parallel_for(static_cast<int>(n_items), threads, [&](int i) {
          bn_out[static_cast<std::size_t>(i)] =
              batchnorm_forward_infer(acts[static_cast<std::size_t>(i)], *lp.bn);
        });
        acts = std::move(bn_out);
      }
    }

    if (l.kind != LayerKind::OutputDense) {
      parallel_for(static_cast<int>(n_items), threads, [&](int i) {
        acts[static_cast<std::size_t>(i)] = relu(acts[static_cast<std::size_t>(i)]);
      });
      if (lc) lc->relu_out = acts;
    }

    if (l.pool_len > 1) {
      if (lc) {
        lc->pool_idx.resize(n_items);
        lc->pre_pool_time.resize(n_items);
      }
      std::vector<FeatureMap<Scalar>> pooled(n_items);
      parallel_for(static_cast<int>(n_items), threads, [&](int i) {
        const std::size_t s = static_cast<std::size_t>(i);
        auto pr = maxpool1d_forward(acts[s], l.pool_len);
        if (lc) {
          lc->pre_pool_time[s] = acts[s].cols();
          lc->pool_idx[s] = std::move(pr.argmax);
        }
        pooled[s] = std::move(pr.out);
      });
      acts = std::move(pooled);
    }

    if (l.kind == LayerKind::FinalConv && dropout_rate > 0) {
      if (train) {
        if (lc) lc->drop_mask.resize(n_items);
        for (std::size_t i = 0; i < n_items; ++i) { // item order, rng determinism
          auto dr = dropout(acts[i], dropout_rate, DropoutMode::Train, *rng);
          acts[i] = std::move(dr.out);
          if (lc) lc->drop_mask[i] = std::move(dr.mask);
        }
      }
      // infer mode: inverted dropout is the identity
    }
  }

  std::vector<Vector<Scalar>> probs(n_items);
  for (std::size_t i = 0; i < n_items; ++i) {
    if (acts[i].cols() != 1)
      throw ShapeError("forward: output layer produced time length " +
                       std::to_string(acts[i].cols()) + ", expected 1");
    probs[i] = sigmoid(acts[i]).col(0);
  }
  return probs;
}

template <typename Scalar>
struct LayerGrads {
  Matrix<Scalar> dweight;
  Vector<Scalar> dbias;
  Vector<Scalar> dgamma, dbeta; // empty when the layer has no batch norm
};

template <typename Scalar>
struct NetGrads {
  std::vector<LayerGrads<Scalar>> layers;
};

/// Backward pass from per-item logit gradients (the bce_loss output).
/// Parameter gradients are summed over items in index order. When
/// dinputs is non-null it receives the gradient wrt each batch input.
template <typename Scalar>
NetGrads<Scalar> backward(const std::vector<LayerSpec>& layers,
                          const ParamSet<Scalar>& params,
                          const ForwardCache<Scalar>& cache,
                          const std::vector<Vector<Scalar>>& dlogits,
                          std::vector<std::type_identity_t<FeatureMap<Scalar>>>* dinputs = nullptr,
                          int threads = 1) {
  const std::size_t n_items = dlogits.size();
  if (cache.layers.size() != layers.size())
    throw ShapeError("backward: cache does not match the layer list");
  NetGrads<Scalar> grads;
  grads.layers.resize(layers.size());

  std::vector<FeatureMap<Scalar>> up(n_items);
  for (std::size_t i = 0; i < n_items; ++i) up[i] = dlogits[i];

  for (std::size_t ri = layers.size(); ri-- > 0;) {
    const LayerSpec& l = layers[ri];
    const LayerParams<Scalar>& lp = params.layers[ri];
    const LayerCache<Scalar>& lc = cache.layers[ri];
    LayerGrads<Scalar>& lg = grads.layers[ri];
    if (lc.conv_in.size() != n_items)
      throw ShapeError("backward: stale or missing cache at layer " + std::to_string(ri));

    if (l.kind == LayerKind::FinalConv && !lc.drop_mask.empty()) {
      parallel_for(static_cast<int>(n_items), threads, [&](int i) {
        const std::size_t s = static_cast<std::size_t>(i);
        up[s] = up[s].cwiseProduct(lc.drop_mask[s]);
      });
    }

    if (l.pool_len > 1) {
      parallel_for(static_cast<int>(n_items), threads, [&](int i) {
        const std::size_t s = static_cast<std::size_t>(i);
        up[s] = maxpool1d_backward(lc.pool_idx[s], lc.pre_pool_time[s], up[s]);
      });
    }

    if (l.kind != LayerKind::OutputDense) {
      parallel_for(static_cast<int>(n_items), threads, [&](int i) {
        const std::size_t s = static_cast<std::size_t>(i);
        up[s] = relu_backward(lc.relu_out[s], up[s]);
      });
    }

    if (lp.bn) {
      auto bg = batchnorm_backward(lc.bn, *lp.bn, up);
      lg.dgamma = std::move(bg.dgamma);
      lg.dbeta = std::move(bg.dbeta);
      up = std::move(bg.dinputs);
    }

    const bool need_dx = ri > 0 || dinputs != nullptr;
    std::vector<ConvGrads<Scalar>> cg(n_items);
    parallel_for(static_cast<int>(n_items), threads, [&](int i) {
      const std::size_t s = static_cast<std::size_t>(i);
      cg[s] = conv1d_backward(lc.conv_in[s], lp.conv, up[s]);
    });
    lg.dweight = Matrix<Scalar>::Zero(lp.conv.weight.rows(), lp.conv.weight.cols());
    lg.dbias = Vector<Scalar>::Zero(lp.conv.bias.size());
    for (std::size_t i = 0; i < n_items; ++i) { // fixed-order reduction
      lg.dweight += cg[i].dweight;
      lg.dbias += cg[i].dbias;
    }
    if (need_dx) {
      for (std::size_t i = 0; i < n_items; ++i) up[i] = std::move(cg[i].dinput);
    }
  }
  if (dinputs) *dinputs = std::move(up);
  return grads;
}

/// Velocity buffers shaped like every trainable array of a ParamSet.
template <typename Scalar>
struct Velocities {
  std::vector<LayerGrads<Scalar>> layers; // reuse the gradient layout

  static Velocities zeros_like(const ParamSet<Scalar>& params) {
    Velocities v;
    v.layers.resize(params.layers.size());
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
      const auto& lp = params.layers[i];
      v.layers[i].dweight = Matrix<Scalar>::Zero(lp.conv.weight.rows(), lp.conv.weight.cols());
      v.layers[i].dbias = Vector<Scalar>::Zero(lp.conv.bias.size());
      if (lp.bn) {
        v.layers[i].dgamma = Vector<Scalar>::Zero(lp.bn->gamma.size());
        v.layers[i].dbeta = Vector<Scalar>::Zero(lp.bn->beta.size());
      }
    }
    return v;
  }
};

/// One Nesterov update over every trainable array.
template <typename Scalar>
void apply_update(ParamSet<Scalar>& params, const NetGrads<Scalar>& grads,
                  Velocities<Scalar>& vel, Scalar lr, Scalar momentum) {
  if (grads.layers.size() != params.layers.size())
    throw ShapeError("apply_update: gradient/parameter layer mismatch");
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    auto& lp = params.layers[i];
    const auto& lg = grads.layers[i];
    auto& lv = vel.layers[i];
    nesterov_step(lp.conv.weight, lg.dweight, lv.dweight, lr, momentum);
    nesterov_step(lp.conv.bias, lg.dbias, lv.dbias, lr, momentum);
    if (lp.bn) {
      nesterov_step(lp.bn->gamma, lg.dgamma, lv.dgamma, lr, momentum);
      nesterov_step(lp.bn->beta, lg.dbeta, lv.dbeta, lr, momentum);
    }
  }
}

} // namespace samplecnn

#endif
