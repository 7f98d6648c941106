// Test-only reference implementations, deliberately brute force and kept
// independent of the library code paths they check.
#ifndef SAMPLECNN_TESTS_ORACLES_HPP
#define SAMPLECNN_TESTS_ORACLES_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace oracles {

/// O(N^2) DFT of a real signal; the gold standard for the FFT/STFT.
inline std::vector<std::complex<double>> dft(const Eigen::VectorXd& x) {
  const auto n = x.size();
  std::vector<std::complex<double>> out(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (Eigen::Index t = 0; t < n; ++t)
      acc += x[t] * std::polar(1.0, -2.0 * M_PI * static_cast<double>(k) *
                                        static_cast<double>(t) / static_cast<double>(n));
    out[static_cast<std::size_t>(k)] = acc;
  }
  return out;
}

/// O(n^2) pair-counting AUC with the ties-count-half convention.
inline double pair_count_auc(const std::vector<double>& scores,
                             const std::vector<std::uint8_t>& labels) {
  double wins = 0.0;
  long long pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      ++pairs;
      if (scores[i] > scores[j])
        wins += 1.0;
      else if (scores[i] == scores[j])
        wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

/// Central finite difference of a scalar function at x, step h.
inline double central_diff(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Elementwise gradient check: |analytic - numeric| <=
/// tol * max(1, |analytic|, |numeric|).
inline bool grad_close(double analytic, double numeric, double tol) {
  const double scale = std::max({1.0, std::abs(analytic), std::abs(numeric)});
  return std::abs(analytic - numeric) <= tol * scale;
}

/// Naive triple-loop 1D convolution matching the strided/padded
/// contract; the reference for the GEMM-based kernel.
inline Eigen::MatrixXd naive_conv1d(const Eigen::MatrixXd& x, const Eigen::MatrixXd& weight,
                                    const Eigen::VectorXd& bias, int in_ch, int filter_len,
                                    int stride, bool zero_pad) {
  const auto in_time = x.cols();
  const auto out_ch = weight.rows();
  Eigen::Index out_time, left_pad = 0;
  if (zero_pad) {
    out_time = (in_time + stride - 1) / stride;
    const Eigen::Index pad_total =
        std::max<Eigen::Index>(0, (out_time - 1) * stride + filter_len - in_time);
    left_pad = std::min<Eigen::Index>((filter_len - 1) / 2, pad_total);
  } else {
    out_time = (in_time - filter_len) / stride + 1;
  }
  Eigen::MatrixXd out(out_ch, out_time);
  for (Eigen::Index o = 0; o < out_ch; ++o)
    for (Eigen::Index t = 0; t < out_time; ++t) {
      double acc = bias[o];
      for (int i = 0; i < in_ch; ++i)
        for (int k = 0; k < filter_len; ++k) {
          const Eigen::Index src = t * stride + k - left_pad;
          if (src < 0 || src >= in_time) continue;
          acc += weight(o, static_cast<Eigen::Index>(k) * in_ch + i) * x(i, src);
        }
      out(o, t) = acc;
    }
  return out;
}

} // namespace oracles

#endif
