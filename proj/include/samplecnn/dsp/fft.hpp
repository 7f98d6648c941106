#ifndef SAMPLECNN_DSP_FFT_HPP
#define SAMPLECNN_DSP_FFT_HPP

#include <cmath>
#include <complex>
#include <vector>

#include "samplecnn/core/error.hpp"
#include "samplecnn/core/types.hpp"

namespace samplecnn {

namespace detail {

// Recursive mixed-radix Cooley-Tukey. 729 = 3^6 runs as pure radix-3;
// any other size decomposes over its prime factors, each prime p costing
// O(N*p) per level.
class Fft {
 public:
  explicit Fft(Index n) : n_(n) {
    if (n <= 0) throw ConfigError("fft: size must be positive");
    twiddles_.resize(static_cast<std::size_t>(n));
    for (Index k = 0; k < n; ++k)
      twiddles_[static_cast<std::size_t>(k)] =
          std::polar(1.0, -2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n));
    Index m = n;
    for (Index p = 2; p * p <= m; ++p)
      while (m % p == 0) {
        factors_.push_back(p);
        m /= p;
      }
    if (m > 1) factors_.push_back(m);
    scratch_.resize(static_cast<std::size_t>(n));
  }

  Index size() const { return n_; }

  /// In-place forward DFT, X[k] = sum_n x[n] e^{-2pi i nk/N}.
  void forward(std::complex<double>* data) { transform(data, n_, 1, 0); }

 private:
  // stride: distance between consecutive logical elements of this block
  // inside the original array. level indexes into factors_.
  void transform(std::complex<double>* data, Index len, Index stride, std::size_t level) {
    if (len == 1) return;
    const Index p = factors_[level];
    const Index m = len / p;

    // Decimation in time: recurse on the p interleaved subsequences.
    for (Index r = 0; r < p; ++r)
      transform(data + r * stride, m, stride * p, level + 1);

    // Combine. X[k + q*m] = sum_r w^{(k+q*m) r} G_r[k], w = e^{-2pi i/len}.
    // Only one combine is live at a time (children finished), so the
    // shared scratch buffer needs no offset bookkeeping.
    std::complex<double>* out = scratch_.data();
    const Index tw_step = n_ / len;
    for (Index k = 0; k < m; ++k) {
      for (Index q = 0; q < p; ++q) {
        std::complex<double> sum = 0.0;
        const Index freq = k + q * m;
        for (Index r = 0; r < p; ++r) {
          const Index tw_idx = (freq * r % len) * tw_step;
          sum += twiddles_[static_cast<std::size_t>(tw_idx)] *
                 data[(k * p + r) * stride];
        }
        out[freq] = sum;
      }
    }
    for (Index i = 0; i < len; ++i) data[i * stride] = out[i];
  }

  Index n_;
  std::vector<Index> factors_;
  std::vector<std::complex<double>> twiddles_;
  std::vector<std::complex<double>> scratch_;
};

} // namespace detail

/// Forward DFT of a real signal; returns the full complex spectrum.
inline std::vector<std::complex<double>> fft_real(const Vector<double>& x) {
  detail::Fft plan(x.size());
  std::vector<std::complex<double>> buf(static_cast<std::size_t>(x.size()));
  for (Index i = 0; i < x.size(); ++i) buf[static_cast<std::size_t>(i)] = x[i];
  plan.forward(buf.data());
  return buf;
}

/// Number of one-sided spectrum bins for a transform of length n.
inline Index onesided_bins(Index n) { return n % 2 == 1 ? (n + 1) / 2 : n / 2 + 1; }

/// One-sided magnitude spectrum |X[0..bins)| of a real signal.
inline Vector<double> magnitude_spectrum(const Vector<double>& x) {
  const auto spec = fft_real(x);
  const Index bins = onesided_bins(x.size());
  Vector<double> mag(bins);
  for (Index b = 0; b < bins; ++b) mag[b] = std::abs(spec[static_cast<std::size_t>(b)]);
  return mag;
}

} // namespace samplecnn

#endif
