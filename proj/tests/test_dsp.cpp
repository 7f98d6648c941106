#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "samplecnn/dsp/fft.hpp"
#include "samplecnn/dsp/mel.hpp"
#include "samplecnn/dsp/normalize.hpp"
#include "samplecnn/dsp/stft.hpp"

using namespace samplecnn;

namespace {

Vector<double> random_signal(Index n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector<double> x(n);
  for (Index i = 0; i < n; ++i) x[i] = u(rng);
  return x;
}

} // namespace

TEST_CASE("fft matches the brute-force DFT on mixed-radix sizes") {
  for (Index n : {1, 2, 3, 5, 8, 12, 27, 35, 97, 243, 600, 729}) {
    const auto x = random_signal(n, static_cast<unsigned>(n));
    const auto fast = fft_real(x);
    const auto slow = oracles::dft(x);
    double max_err = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < slow.size(); ++k) {
      max_err = std::max(max_err, std::abs(fast[k] - slow[k]));
      scale = std::max(scale, std::abs(slow[k]));
    }
    CAPTURE(n);
    CHECK(max_err <= 1e-9 * std::max(scale, 1.0));
  }
}

TEST_CASE("stft bins and frames bookkeeping") {
  StftConfig cfg;
  cfg.fft_size = 729;
  cfg.hop = 243;
  const auto x = Vector<double>::Zero(2000).eval();
  const auto mag = stft_magnitude<double>(x, cfg);
  CHECK(mag.rows() == 365); // (729+1)/2
  CHECK(mag.cols() == (2000 - 729) / 243 + 1);
  CHECK(mag.isZero(0.0));

  StftConfig even;
  even.fft_size = 8;
  even.hop = 8;
  CHECK(stft_magnitude<double>(random_signal(64, 1), even).rows() == 5);

  CHECK_THROWS_AS(stft_magnitude<double>(random_signal(100, 2), cfg), ShapeError);
}

TEST_CASE("stft recovers an exact-bin cosine with rectangular window") {
  StftConfig cfg;
  cfg.fft_size = 729;
  cfg.hop = 729;
  cfg.window = Window::Rectangular;
  const int bin = 27;
  Vector<double> x(729);
  for (Index t = 0; t < 729; ++t) x[t] = std::cos(2.0 * M_PI * bin * t / 729.0);
  const auto mag = stft_magnitude<double>(x, cfg);
  CHECK(mag.cols() == 1);
  CHECK(mag(bin, 0) == doctest::Approx(729.0 / 2.0).epsilon(1e-12));
  for (Index b = 0; b < mag.rows(); ++b) {
    if (b == bin) continue;
    CHECK(mag(b, 0) < 1e-6 * mag(bin, 0));
  }
}

TEST_CASE("stft equals the DFT oracle within 1e-9 relative") {
  for (int n : {8, 27, 243, 729}) {
    StftConfig cfg;
    cfg.fft_size = n;
    cfg.hop = n;
    cfg.window = Window::Rectangular;
    const auto x = random_signal(n, static_cast<unsigned>(100 + n));
    const auto mag = stft_magnitude<double>(x, cfg);
    const auto ref = oracles::dft(x);
    for (Index b = 0; b < mag.rows(); ++b) {
      const double want = std::abs(ref[static_cast<std::size_t>(b)]);
      CHECK(std::abs(mag(b, 0) - want) <= 1e-9 * std::max(1.0, want));
    }
  }
}

TEST_CASE("Parseval holds for the rectangular window") {
  const int n = 243;
  StftConfig cfg;
  cfg.fft_size = n;
  cfg.hop = n;
  cfg.window = Window::Rectangular;
  const auto x = random_signal(n, 7);
  const auto mag = stft_magnitude<double>(x, cfg);
  // odd n: bin 0 once, bins 1..(n-1)/2 doubled
  double spectral = mag(0, 0) * mag(0, 0);
  for (Index b = 1; b < mag.rows(); ++b) spectral += 2.0 * mag(b, 0) * mag(b, 0);
  const double energy = x.squaredNorm() * n;
  CHECK(spectral == doctest::Approx(energy).epsilon(1e-6));
}

TEST_CASE("mel filterbank shape and well-formedness") {
  const auto fb = mel_filterbank<double>(128, 729, 22050, 0.0, 11025.0);
  CHECK(fb.rows() == 128);
  CHECK(fb.cols() == 365);
  CHECK((fb.array() >= 0).all());
  for (Index k = 0; k < fb.rows(); ++k) {
    CAPTURE(k);
    CHECK(fb.row(k).maxCoeff() > 0);
    CHECK(fb.row(k).sum() > 0);
  }
  const auto centers = mel_center_frequencies(128, 0.0, 11025.0);
  for (Index k = 1; k < centers.size(); ++k) CHECK(centers[k] > centers[k - 1]);

  CHECK_THROWS_AS(mel_filterbank<double>(128, 729, 22050, 100.0, 100.0), ConfigError);
  CHECK_THROWS_AS(mel_filterbank<double>(128, 729, 22050, 0.0, 20000.0), ConfigError);
}

TEST_CASE("log_compress closed forms") {
  Matrix<double> x(1, 1);
  x << 0.0;
  CHECK(log_compress(x, 10.0)(0, 0) == 0.0);
  x << 0.9;
  CHECK(std::abs(log_compress(x, 10.0)(0, 0) - std::log(10.0)) < 1e-12);

  // monotone on random grids
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  for (int i = 0; i < 200; ++i) {
    const double a = u(rng), b = u(rng);
    Matrix<double> xa(1, 1), xb(1, 1);
    xa << std::min(a, b);
    xb << std::max(a, b) + 1e-9;
    CHECK(log_compress(xa, 10.0)(0, 0) < log_compress(xb, 10.0)(0, 0));
  }

  Matrix<double> bad(1, 1);
  bad << -0.1;
  CHECK_THROWS_AS(log_compress(bad, 10.0), Error);
}

TEST_CASE("melspectrogram frame bookkeeping matches the architecture table") {
  AudioClip clip;
  clip.sample_rate_hz = 22050;
  clip.samples = Vector<float>::Zero(59049);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<float> u(-0.5f, 0.5f);
  for (Index i = 0; i < clip.samples.size(); ++i) clip.samples[i] = u(rng);

  StftConfig cfg;
  cfg.fft_size = 243;
  cfg.hop = 81;
  const auto spec = melspectrogram<float>(clip, cfg, 128, 10.0);
  CHECK(spec.rows() == 128);
  CHECK(spec.cols() == 729);
  CHECK(spec.allFinite());
  CHECK((spec.array() >= 0).all());

  // window = hop rows of the comparison grid
  for (int wh : {729, 243, 81}) {
    StftConfig c2;
    c2.fft_size = wh;
    c2.hop = wh;
    CHECK(melspectrogram<float>(clip, c2, 128, 10.0).cols() == 59049 / wh);
  }
  // window larger than hop: frame count is set by the hop alone
  StftConfig wide;
  wide.fft_size = 729;
  wide.hop = 243;
  CHECK(melspectrogram<float>(clip, wide, 128, 10.0).cols() == 59049 / 243);

  AudioClip zero;
  zero.sample_rate_hz = 22050;
  zero.samples = Vector<float>::Zero(1000);
  CHECK(melspectrogram<float>(zero, cfg, 32, 10.0).isZero(0.0f));

  // doubling C never decreases any entry
  const auto spec2 = melspectrogram<float>(clip, cfg, 128, 20.0);
  CHECK(((spec2 - spec).array() >= -1e-6f).all());
}

TEST_CASE("spectrogram csv dump is bands rows x frames columns") {
  Spectrogram<float> spec(3, 4);
  spec << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12;
  const auto path =
      (std::filesystem::temp_directory_path() / "spec_dump.csv").string();
  write_spectrogram_csv(spec, path);
  std::ifstream in(path);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "1,2,3,4");
  CHECK(lines[2] == "9,10,11,12");
}

TEST_CASE("normalization fit/apply") {
  std::vector<Spectrogram<float>> specs;
  std::mt19937_64 rng(5);
  std::normal_distribution<float> g(3.0f, 2.0f);
  for (int i = 0; i < 4; ++i) {
    Spectrogram<float> s(8, 50);
    for (Index c = 0; c < s.cols(); ++c)
      for (Index r = 0; r < s.rows(); ++r) s(r, c) = g(rng);
    specs.push_back(std::move(s));
  }
  const auto stats = fit_norm(specs);
  double sum = 0.0, sum_sq = 0.0;
  long count = 0;
  for (auto& s : specs) {
    const auto n = apply_norm(s, stats);
    sum += n.template cast<double>().sum();
    sum_sq += n.template cast<double>().array().square().sum();
    count += n.size();
  }
  const double mean = sum / count;
  const double var = sum_sq / count - mean * mean;
  CHECK(std::abs(mean) < 1e-5);
  CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-4);

  // identity stats
  Spectrogram<float> s = specs[0];
  CHECK(apply_norm(s, NormStats{0.0, 1.0}).isApprox(s));

  // constant training set is degenerate
  std::vector<Spectrogram<float>> flat{Spectrogram<float>::Constant(4, 4, 2.5f)};
  CHECK_THROWS_AS(fit_norm(flat), StatsError);
  CHECK_THROWS_AS(fit_norm(std::vector<Spectrogram<float>>{}), StatsError);
}
