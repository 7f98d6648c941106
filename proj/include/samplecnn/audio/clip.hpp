#ifndef SAMPLECNN_AUDIO_CLIP_HPP
#define SAMPLECNN_AUDIO_CLIP_HPP

#include <cmath>
#include <string>

#include "samplecnn/core/error.hpp"
#include "samplecnn/core/types.hpp"

namespace samplecnn {

/// Mono PCM audio, amplitudes in nominal [-1, 1).
struct AudioClip {
  Vector<float> samples;
  int sample_rate_hz = 0;

  Index length() const { return samples.size(); }
  double seconds() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

inline void validate_clip(const AudioClip& clip, const std::string& what) {
  if (clip.sample_rate_hz <= 0)
    throw DataError(what + ": sample rate must be positive");
  if (clip.samples.size() == 0) throw DataError(what + ": clip is empty");
  if (!clip.samples.allFinite())
    throw DataError(what + ": clip contains non-finite samples");
}

enum class TrimPolicy { Center, Head, Tail };

/// Forces the clip to exactly round(target_seconds * rate) samples.
/// Longer inputs are trimmed (center by default), shorter ones get
/// trailing zeros.
inline AudioClip trim_or_pad(const AudioClip& clip, double target_seconds,
                             TrimPolicy policy = TrimPolicy::Center) {
  if (target_seconds <= 0) throw ConfigError("trim_or_pad: target_seconds must be > 0");
  const Index target =
      static_cast<Index>(std::llround(target_seconds * clip.sample_rate_hz));
  const Index len = clip.samples.size();
  AudioClip out;
  out.sample_rate_hz = clip.sample_rate_hz;
  if (target == len) {
    out.samples = clip.samples;
  } else if (target < len) {
    Index start = 0;
    switch (policy) {
      case TrimPolicy::Center: start = (len - target) / 2; break;
      case TrimPolicy::Head: start = 0; break;
      case TrimPolicy::Tail: start = len - target; break;
    }
    out.samples = clip.samples.segment(start, target);
  } else {
    out.samples = Vector<float>::Zero(target);
    out.samples.head(len) = clip.samples;
  }
  return out;
}

} // namespace samplecnn

#endif
