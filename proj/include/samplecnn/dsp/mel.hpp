#ifndef SAMPLECNN_DSP_MEL_HPP
#define SAMPLECNN_DSP_MEL_HPP

#include <cmath>
#include <fstream>
#include <string>

#include "samplecnn/audio/clip.hpp"
#include "samplecnn/core/error.hpp"
#include "samplecnn/core/types.hpp"
#include "samplecnn/dsp/stft.hpp"

namespace samplecnn {

inline double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
inline double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

/// Triangular filters with centers equally spaced on the mel scale,
/// adjacent filters overlapping 50% in mel space. (n_mels x bins), HTK
/// mel formula, no area normalization.
template <typename Scalar>
Matrix<Scalar> mel_filterbank(int n_mels, int fft_size, int sample_rate_hz,
                              double fmin, double fmax) {
  if (n_mels < 1) throw ConfigError("mel_filterbank: n_mels must be >= 1");
  if (!(fmin >= 0 && fmin < fmax && fmax <= sample_rate_hz / 2.0))
    throw ConfigError("mel_filterbank: need 0 <= fmin < fmax <= rate/2");
  const Index bins = onesided_bins(fft_size);
  const double mel_lo = hz_to_mel(fmin);
  const double mel_hi = hz_to_mel(fmax);

  // n_mels + 2 boundary points; filter k rises over [pt k, pt k+1] and
  // falls over [pt k+1, pt k+2].
  Vector<double> pts(n_mels + 2);
  for (int k = 0; k < n_mels + 2; ++k)
    pts[k] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * k / (n_mels + 1));

  Matrix<Scalar> fb = Matrix<Scalar>::Zero(n_mels, bins);
  for (Index b = 0; b < bins; ++b) {
    const double f = static_cast<double>(b) * sample_rate_hz / fft_size;
    for (int k = 0; k < n_mels; ++k) {
      const double left = pts[k], center = pts[k + 1], right = pts[k + 2];
      double w = 0.0;
      if (f > left && f < center)
        w = (f - left) / (center - left);
      else if (f == center)
        w = 1.0;
      else if (f > center && f < right)
        w = (right - f) / (right - center);
      if (w > 0) fb(k, b) = static_cast<Scalar>(w);
    }
  }
  return fb;
}

/// Center (peak) frequencies of the filters from mel_filterbank.
inline Vector<double> mel_center_frequencies(int n_mels, double fmin, double fmax) {
  const double mel_lo = hz_to_mel(fmin);
  const double mel_hi = hz_to_mel(fmax);
  Vector<double> centers(n_mels);
  for (int k = 0; k < n_mels; ++k)
    centers[k] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * (k + 1) / (n_mels + 1));
  return centers;
}

/// Entrywise ln(1 + C*x) amplitude compression.
template <typename Derived>
Matrix<typename Derived::Scalar> log_compress(const Eigen::MatrixBase<Derived>& x,
                                              double C) {
  if (C <= 0) throw ConfigError("log_compress: C must be positive");
  if ((x.array() < 0).any()) throw Error("log_compress: negative magnitude entry");
  using S = typename Derived::Scalar;
  return (x.derived().array() * static_cast<S>(C)).log1p().matrix();
}

/// Log-compressed mel-spectrogram, (n_mels x frames). The clip is
/// zero-padded at the tail so that frames = ceil(len / hop); with the
/// hop dividing the clip length this is exactly len / hop.
template <typename Scalar>
Spectrogram<Scalar> melspectrogram(const AudioClip& clip, const StftConfig& cfg,
                                   int n_mels, double C) {
  validate_stft_config(cfg);
  const Index len = clip.samples.size();
  if (len < cfg.fft_size)
    throw ShapeError("melspectrogram: clip shorter than one frame");
  const Index frames = (len + cfg.hop - 1) / cfg.hop;
  const Index padded = (frames - 1) * cfg.hop + cfg.fft_size;
  Vector<Scalar> x = Vector<Scalar>::Zero(padded);
  x.head(len) = clip.samples.template cast<Scalar>();

  const Matrix<Scalar> mag = stft_magnitude<Scalar>(x, cfg);
  const Matrix<Scalar> fb =
      mel_filterbank<Scalar>(n_mels, cfg.fft_size, clip.sample_rate_hz, 0.0,
                             clip.sample_rate_hz / 2.0);
  return log_compress((fb * mag).eval(), C);
}

/// Debug dump: bands rows x frames columns, comma separated.
template <typename Scalar>
void write_spectrogram_csv(const Spectrogram<Scalar>& spec, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("write_spectrogram_csv: cannot open " + path);
  os.precision(9);
  for (Index b = 0; b < spec.rows(); ++b) {
    for (Index t = 0; t < spec.cols(); ++t) {
      if (t) os << ',';
      os << spec(b, t);
    }
    os << '\n';
  }
  if (!os) throw Error("write_spectrogram_csv: write failed for " + path);
}

} // namespace samplecnn

#endif
