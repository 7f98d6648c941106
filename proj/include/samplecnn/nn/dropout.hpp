#ifndef SAMPLECNN_NN_DROPOUT_HPP
#define SAMPLECNN_NN_DROPOUT_HPP

#include <random>

#include "samplecnn/core/error.hpp"
#include "samplecnn/core/types.hpp"

namespace samplecnn {

/// Inverted-dropout mask: entries are 0 with probability rate, else
/// 1/(1-rate). Multiplying by the mask is both forward and backward.
template <typename Scalar>
FeatureMap<Scalar> dropout_mask(Index rows, Index cols, double rate,
                                std::mt19937_64& rng) {
  if (rate < 0 || rate >= 1) throw ConfigError("dropout: rate must be in [0, 1)");
  FeatureMap<Scalar> mask(rows, cols);
  if (rate == 0) {
    mask.setOnes();
    return mask;
  }
  const Scalar keep = static_cast<Scalar>(1.0 / (1.0 - rate));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r)
      mask(r, c) = u(rng) < rate ? Scalar(0) : keep;
  return mask;
}

enum class DropoutMode { Train, Infer };

template <typename Scalar>
struct DropoutResult {
  FeatureMap<Scalar> out;
  FeatureMap<Scalar> mask;
};

/// Train mode zeroes entries with probability rate and scales survivors
/// by 1/(1-rate); infer mode is the identity.
template <typename Scalar>
DropoutResult<Scalar> dropout(const FeatureMap<Scalar>& x, double rate, DropoutMode mode,
                              std::mt19937_64& rng) {
  DropoutResult<Scalar> r;
  if (mode == DropoutMode::Infer || rate == 0) {
    r.out = x;
    r.mask = FeatureMap<Scalar>::Ones(x.rows(), x.cols());
    return r;
  }
  r.mask = dropout_mask<Scalar>(x.rows(), x.cols(), rate, rng);
  r.out = x.cwiseProduct(r.mask);
  return r;
}

} // namespace samplecnn

#endif
