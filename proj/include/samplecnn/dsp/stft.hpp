#ifndef SAMPLECNN_DSP_STFT_HPP
#define SAMPLECNN_DSP_STFT_HPP

#include <cmath>
#include <complex>
#include <vector>

#include "samplecnn/core/error.hpp"
#include "samplecnn/core/types.hpp"
#include "samplecnn/dsp/fft.hpp"

namespace samplecnn {

enum class Window { Hann, Rectangular };

struct StftConfig {
  int fft_size = 729;
  int hop = 729;
  Window window = Window::Hann;
};

inline void validate_stft_config(const StftConfig& cfg) {
  if (cfg.fft_size <= 0) throw ConfigError("stft: fft_size must be positive");
  if (cfg.hop <= 0) throw ConfigError("stft: hop must be positive");
  if (cfg.hop > cfg.fft_size) throw ConfigError("stft: hop must not exceed fft_size");
}

inline Vector<double> make_window(Window w, int n) {
  Vector<double> win(n);
  switch (w) {
    case Window::Rectangular:
      win.setOnes();
      break;
    case Window::Hann:
      for (int i = 0; i < n; ++i)
        win[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / n));
      break;
  }
  return win;
}

/// One-sided STFT magnitudes, (bins x frames) with
/// bins = (fft_size+1)/2 for odd sizes, fft_size/2+1 for even, and
/// frames = floor((len - fft_size)/hop) + 1.
template <typename Scalar>
Matrix<Scalar> stft_magnitude(const Vector<Scalar>& samples, const StftConfig& cfg) {
  validate_stft_config(cfg);
  const Index len = samples.size();
  if (len < cfg.fft_size)
    throw ShapeError("stft: signal shorter than one frame (" + std::to_string(len) +
                     " < " + std::to_string(cfg.fft_size) + ")");
  const Index bins = onesided_bins(cfg.fft_size);
  const Index frames = (len - cfg.fft_size) / cfg.hop + 1;
  const Vector<double> win = make_window(cfg.window, cfg.fft_size);

  detail::Fft plan(cfg.fft_size);
  std::vector<std::complex<double>> buf(static_cast<std::size_t>(cfg.fft_size));
  Matrix<Scalar> mag(bins, frames);
  for (Index t = 0; t < frames; ++t) {
    const Index off = t * cfg.hop;
    for (int i = 0; i < cfg.fft_size; ++i)
      buf[static_cast<std::size_t>(i)] =
          static_cast<double>(samples[off + i]) * win[i];
    plan.forward(buf.data());
    for (Index b = 0; b < bins; ++b)
      mag(b, t) = static_cast<Scalar>(std::abs(buf[static_cast<std::size_t>(b)]));
  }
  return mag;
}

} // namespace samplecnn

#endif
