#ifndef SAMPLECNN_AUDIO_SYNTH_HPP
#define SAMPLECNN_AUDIO_SYNTH_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "samplecnn/audio/clip.hpp"
#include "samplecnn/audio/manifest.hpp"
#include "samplecnn/core/error.hpp"
#include "samplecnn/core/rng.hpp"

namespace samplecnn {

/// Desk-scale tone-band dataset: tag k of a clip is set iff the clip
/// contains a sinusoid inside frequency band k.
struct SynthSpec {
  int n_clips = 100;
  double clip_seconds = 1.2;
  int sample_rate_hz = 8000;
  int n_bands = 8; // = number of tags
  double noise_level = 0.0;
  std::uint64_t seed = 0;
};

/// Band edges partition [100 Hz, 0.9 * Nyquist] log-uniformly;
/// returns n_bands + 1 edges.
inline std::vector<double> synth_band_edges(int n_bands, int sample_rate_hz) {
  const double lo = 100.0;
  const double hi = 0.9 * sample_rate_hz / 2.0;
  if (n_bands < 1) throw ConfigError("synth_band_edges: n_bands must be >= 1");
  if (hi <= lo) throw ConfigError("synth_band_edges: sample rate too low for the band plan");
  std::vector<double> edges(static_cast<std::size_t>(n_bands) + 1);
  for (int k = 0; k <= n_bands; ++k)
    edges[static_cast<std::size_t>(k)] =
        lo * std::pow(hi / lo, static_cast<double>(k) / n_bands);
  return edges;
}

inline void validate_synth_spec(const SynthSpec& spec) {
  if (spec.n_clips <= 0) throw ConfigError("SynthSpec: n_clips must be positive");
  if (spec.clip_seconds <= 0) throw ConfigError("SynthSpec: clip_seconds must be positive");
  if (spec.sample_rate_hz <= 0) throw ConfigError("SynthSpec: sample_rate_hz must be positive");
  if (spec.n_bands < 1) throw ConfigError("SynthSpec: n_bands must be >= 1");
  if (spec.noise_level < 0) throw ConfigError("SynthSpec: noise_level must be >= 0");
}

/// Deterministic in spec.seed. Each clip holds 1-3 tones in distinct
/// bands (log-uniform frequency, kept 10% of the band's log width away
/// from the edges so spectral leakage stays inside the band) plus white
/// noise; splits are 80/10/10 by index.
inline std::pair<std::vector<AudioClip>, std::vector<ManifestEntry>>
generate_synthetic(const SynthSpec& spec) {
  validate_synth_spec(spec);
  const auto edges = synth_band_edges(spec.n_bands, spec.sample_rate_hz);
  const Index n_samples =
      static_cast<Index>(std::llround(spec.clip_seconds * spec.sample_rate_hz));
  if (n_samples <= 0) throw ConfigError("SynthSpec: clip too short");

  const int n_train = static_cast<int>(0.8 * spec.n_clips);
  const int n_valid = static_cast<int>(0.9 * spec.n_clips) - n_train;

  std::vector<AudioClip> clips;
  std::vector<ManifestEntry> entries;
  clips.reserve(static_cast<std::size_t>(spec.n_clips));
  entries.reserve(static_cast<std::size_t>(spec.n_clips));

  for (int ci = 0; ci < spec.n_clips; ++ci) {
    auto rng = make_rng(spec.seed, static_cast<std::uint64_t>(ci));
    const int n_tones = std::uniform_int_distribution<int>(1, std::min(3, spec.n_bands))(rng);

    // distinct bands
    std::vector<int> bands(static_cast<std::size_t>(spec.n_bands));
    for (int k = 0; k < spec.n_bands; ++k) bands[static_cast<std::size_t>(k)] = k;
    for (int k = 0; k < n_tones; ++k) {
      const int j = std::uniform_int_distribution<int>(k, spec.n_bands - 1)(rng);
      std::swap(bands[static_cast<std::size_t>(k)], bands[static_cast<std::size_t>(j)]);
    }

    AudioClip clip;
    clip.sample_rate_hz = spec.sample_rate_hz;
    Vector<double> acc = Vector<double>::Zero(n_samples);
    ManifestEntry entry;
    entry.tags.assign(static_cast<std::size_t>(spec.n_bands), 0);

    for (int k = 0; k < n_tones; ++k) {
      const int band = bands[static_cast<std::size_t>(k)];
      const double log_lo = std::log(edges[static_cast<std::size_t>(band)]);
      const double log_hi = std::log(edges[static_cast<std::size_t>(band) + 1]);
      const double margin = 0.10 * (log_hi - log_lo);
      const double freq = std::exp(
          std::uniform_real_distribution<double>(log_lo + margin, log_hi - margin)(rng));
      const double amp = std::uniform_real_distribution<double>(0.4, 0.9)(rng) / n_tones;
      const double phase = std::uniform_real_distribution<double>(0.0, 2.0 * M_PI)(rng);
      const double w = 2.0 * M_PI * freq / spec.sample_rate_hz;
      for (Index t = 0; t < n_samples; ++t) acc[t] += amp * std::sin(w * t + phase);
      entry.tags[static_cast<std::size_t>(band)] = 1;
    }
    if (spec.noise_level > 0) {
      std::normal_distribution<double> noise(0.0, spec.noise_level);
      for (Index t = 0; t < n_samples; ++t) acc[t] += noise(rng);
    }
    clip.samples = acc.cast<float>();

    char name[32];
    std::snprintf(name, sizeof(name), "synth_%06d.wav", ci);
    entry.clip_path = name;
    entry.split = ci < n_train ? Split::Train : (ci < n_train + n_valid ? Split::Valid : Split::Test);
    clips.push_back(std::move(clip));
    entries.push_back(std::move(entry));
  }
  return {std::move(clips), std::move(entries)};
}

} // namespace samplecnn

#endif
