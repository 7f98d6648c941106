#ifndef SAMPLECNN_TRAIN_DATA_HPP
#define SAMPLECNN_TRAIN_DATA_HPP

#include <optional>
#include <string>
#include <vector>

#include "samplecnn/audio/clip.hpp"
#include "samplecnn/audio/manifest.hpp"
#include "samplecnn/audio/wav.hpp"
#include "samplecnn/dsp/mel.hpp"
#include "samplecnn/dsp/normalize.hpp"
#include "samplecnn/model/spec.hpp"
#include "samplecnn/train/trainer.hpp"

namespace samplecnn {

/// Everything training/eval needs, keyed by split. Raw-waveform families
/// carry unnormalized 1 x samples maps; the mel family carries
/// mel_bands x frames spectrograms normalized with statistics fitted on
/// the training split only.
struct PreparedSplits {
  TaggedData<float> train, valid, test;
  std::optional<NormStats> norm; // set only for the mel family

  TaggedData<float>& split(Split s) {
    switch (s) {
      case Split::Train: return train;
      case Split::Valid: return valid;
      case Split::Test: return test;
    }
    return train;
  }
};

namespace detail {

inline Matrix<float> labels_of(const std::vector<const ManifestEntry*>& entries) {
  if (entries.empty()) return {};
  const Index n_tags = static_cast<Index>(entries.front()->tags.size());
  Matrix<float> labels(n_tags, static_cast<Index>(entries.size()));
  for (std::size_t c = 0; c < entries.size(); ++c)
    for (Index t = 0; t < n_tags; ++t)
      labels(t, static_cast<Index>(c)) = entries[c]->tags[static_cast<std::size_t>(t)] ? 1.f : 0.f;
  return labels;
}

} // namespace detail

/// Builds the per-split tensors from already-loaded clips (order must
/// match the manifest).
inline PreparedSplits prepare_splits(const std::vector<AudioClip>& clips,
                                     const std::vector<ManifestEntry>& manifest,
                                     const ModelSpec& spec, const StftConfig& mel_cfg,
                                     double mel_C = 10.0) {
  if (clips.size() != manifest.size())
    throw DataError("prepare_splits: clip/manifest count mismatch");
  const ModelSpec s = resolve_spec(spec);

  PreparedSplits out;
  std::vector<const ManifestEntry*> by_split[3];
  std::vector<const AudioClip*> clips_by_split[3];
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const int k = static_cast<int>(manifest[i].split);
    by_split[k].push_back(&manifest[i]);
    clips_by_split[k].push_back(&clips[i]);
  }

  std::vector<Spectrogram<float>> train_specs; // for mel normalization
  for (int k = 0; k < 3; ++k) {
    TaggedData<float>& data = out.split(static_cast<Split>(k));
    data.labels = detail::labels_of(by_split[k]);
    data.inputs.reserve(by_split[k].size());
    data.names.reserve(by_split[k].size());
    for (std::size_t c = 0; c < by_split[k].size(); ++c) {
      data.names.push_back(by_split[k][c]->clip_path);
      const AudioClip& clip = *clips_by_split[k][c];
      if (s.family == Family::MelFrame) {
        Spectrogram<float> spec_map = melspectrogram<float>(clip, mel_cfg, s.mel_bands, mel_C);
        if (k == 0) train_specs.push_back(spec_map);
        data.inputs.push_back(std::move(spec_map));
      } else {
        data.inputs.push_back(clip.samples.transpose());
      }
    }
  }

  if (s.family == Family::MelFrame) {
    out.norm = fit_norm(train_specs);
    for (int k = 0; k < 3; ++k) {
      TaggedData<float>& data = out.split(static_cast<Split>(k));
      for (auto& x : data.inputs) x = apply_norm(x, *out.norm);
    }
  }
  return out;
}

/// Disk-backed variant: loads every manifest clip from base_dir.
inline PreparedSplits load_splits(const std::vector<ManifestEntry>& manifest,
                                  const std::string& base_dir, const ModelSpec& spec,
                                  const StftConfig& mel_cfg, double mel_C = 10.0) {
  std::vector<AudioClip> clips;
  clips.reserve(manifest.size());
  for (const auto& e : manifest) {
    const std::string path =
        e.clip_path.front() == '/' ? e.clip_path : base_dir + "/" + e.clip_path;
    clips.push_back(load_wav(path));
  }
  return prepare_splits(clips, manifest, spec, mel_cfg, mel_C);
}

} // namespace samplecnn

#endif
