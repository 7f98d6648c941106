#ifndef SAMPLECNN_DSP_NORMALIZE_HPP
#define SAMPLECNN_DSP_NORMALIZE_HPP

#include <cmath>
#include <vector>

#include "samplecnn/core/error.hpp"
#include "samplecnn/core/types.hpp"

namespace samplecnn {

/// Global input statistics for the mel pipeline. Raw-waveform pipelines
/// never use these.
struct NormStats {
  double mean = 0.0;
  double std = 1.0;
};

/// Pooled mean/std over every entry of every training spectrogram.
template <typename Scalar>
NormStats fit_norm(const std::vector<Spectrogram<Scalar>>& specs) {
  if (specs.empty()) throw StatsError("fit_norm: no training spectrograms");
  long double sum = 0.0L, sum_sq = 0.0L;
  long long count = 0;
  for (const auto& s : specs) {
    sum += static_cast<long double>(s.template cast<double>().sum());
    sum_sq += static_cast<long double>(s.template cast<double>().array().square().sum());
    count += s.size();
  }
  if (count == 0) throw StatsError("fit_norm: empty spectrograms");
  const double mean = static_cast<double>(sum / count);
  const double var = static_cast<double>(sum_sq / count) - mean * mean;
  if (!(var > 0))
    throw StatsError("fit_norm: zero variance across the training set");
  return NormStats{mean, std::sqrt(var)};
}

template <typename Scalar>
Spectrogram<Scalar> apply_norm(const Spectrogram<Scalar>& spec, const NormStats& stats) {
  if (!(stats.std > 0)) throw StatsError("apply_norm: std must be positive");
  return ((spec.template cast<double>().array() - stats.mean) / stats.std)
      .template cast<Scalar>()
      .matrix();
}

} // namespace samplecnn

#endif
