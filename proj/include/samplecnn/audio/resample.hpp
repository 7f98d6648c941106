#ifndef SAMPLECNN_AUDIO_RESAMPLE_HPP
#define SAMPLECNN_AUDIO_RESAMPLE_HPP

#include <cmath>
#include <numeric>
#include <vector>

#include "samplecnn/audio/clip.hpp"
#include "samplecnn/core/error.hpp"

namespace samplecnn {

namespace detail {

// Zeroth-order modified Bessel function, power series.
inline double bessel_i0(double x) {
  double sum = 1.0, term = 1.0;
  const double half_x = x / 2.0;
  for (int k = 1; k < 64; ++k) {
    term *= (half_x / k) * (half_x / k);
    sum += term;
    if (term < sum * 1e-18) break;
  }
  return sum;
}

struct SincKernel {
  double cutoff;     // cycles per input sample, <= 0.5
  double gain;       // compensates downsampling bandwidth loss
  int half_taps;     // taps on each side of the center
  double beta;

  double operator()(double u) const {
    if (std::abs(u) >= half_taps) return 0.0;
    const double a = 2.0 * cutoff * u;
    const double s = a == 0.0 ? 1.0 : std::sin(M_PI * a) / (M_PI * a);
    const double w = bessel_i0(beta * std::sqrt(1.0 - (u / half_taps) * (u / half_taps))) /
                     bessel_i0(beta);
    return gain * 2.0 * cutoff * s * w;
  }
};

} // namespace detail

/// Band-limited polyphase resampler: Kaiser-windowed sinc, 64 taps per
/// phase. Output length is round(n * target / source). Matching rates
/// return the input unchanged.
inline AudioClip resample(const AudioClip& clip, int target_hz) {
  if (target_hz <= 0) throw ConfigError("resample: target rate must be positive");
  if (clip.sample_rate_hz == target_hz) return clip;

  const int src = clip.sample_rate_hz;
  const Index in_len = clip.samples.size();
  const Index out_len = static_cast<Index>(
      std::llround(static_cast<double>(in_len) * target_hz / src));

  const double ratio = static_cast<double>(target_hz) / src;
  detail::SincKernel kernel;
  kernel.half_taps = 32;
  kernel.beta = 8.6;
  kernel.cutoff = 0.5 * std::min(1.0, ratio);
  kernel.gain = 1.0;

  const int g = std::gcd(src, target_hz);
  const long up = target_hz / g;   // phase count
  const long down = src / g;

  // One table row per fractional phase r/up when the rational factor is
  // small; direct kernel evaluation otherwise.
  std::vector<std::vector<double>> phases;
  const bool tabulate = up <= 4096;
  if (tabulate) {
    phases.resize(static_cast<std::size_t>(up));
    for (long r = 0; r < up; ++r) {
      const double frac = static_cast<double>(r) / up;
      auto& taps = phases[static_cast<std::size_t>(r)];
      taps.resize(static_cast<std::size_t>(2 * kernel.half_taps));
      for (int j = 0; j < 2 * kernel.half_taps; ++j) {
        const double u = (j - kernel.half_taps + 1) - frac;
        taps[static_cast<std::size_t>(j)] = kernel(u);
      }
    }
  }

  AudioClip out;
  out.sample_rate_hz = target_hz;
  out.samples.resize(out_len);
  for (Index n = 0; n < out_len; ++n) {
    // Input-sample position of output n is num/up = base + rem/up, exact.
    const long long num = static_cast<long long>(n) * down;
    const Index base = static_cast<Index>(num / up);
    const long rem = static_cast<long>(num % up);
    double acc = 0.0;
    if (tabulate) {
      const auto& taps = phases[static_cast<std::size_t>(rem)];
      for (int j = 0; j < 2 * kernel.half_taps; ++j) {
        const Index idx = base + j - kernel.half_taps + 1;
        if (idx < 0 || idx >= in_len) continue;
        acc += taps[static_cast<std::size_t>(j)] * clip.samples[idx];
      }
    } else {
      const double frac = static_cast<double>(rem) / up;
      for (int j = 0; j < 2 * kernel.half_taps; ++j) {
        const Index idx = base + j - kernel.half_taps + 1;
        if (idx < 0 || idx >= in_len) continue;
        acc += kernel((j - kernel.half_taps + 1) - frac) * clip.samples[idx];
      }
    }
    out.samples[n] = static_cast<float>(acc);
  }
  return out;
}

} // namespace samplecnn

#endif
