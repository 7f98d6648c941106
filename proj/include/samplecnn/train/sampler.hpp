#ifndef SAMPLECNN_TRAIN_SAMPLER_HPP
#define SAMPLECNN_TRAIN_SAMPLER_HPP

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "samplecnn/core/error.hpp"
#include "samplecnn/core/types.hpp"

namespace samplecnn {

/// A window of model-input length inside one clip. Offsets are samples
/// for raw families and frames for the mel family.
struct Segment {
  int clip_index = 0;
  Index start = 0;
};

/// One uniformly random segment per clip, order shuffled. clip_lens are
/// in the same unit as input_len.
inline std::vector<Segment> sample_train_segments(const std::vector<Index>& clip_lens,
                                                  Index input_len, std::mt19937_64& rng,
                                                  const std::vector<std::string>* names = nullptr) {
  std::vector<Segment> segs;
  segs.reserve(clip_lens.size());
  for (std::size_t i = 0; i < clip_lens.size(); ++i) {
    if (clip_lens[i] < input_len)
      throw DataError("segment sampling: clip " +
                      (names ? (*names)[i] : std::to_string(i)) + " has length " +
                      std::to_string(clip_lens[i]) + " < input length " +
                      std::to_string(input_len));
    const Index max_start = clip_lens[i] - input_len;
    const Index start =
        max_start == 0
            ? 0
            : static_cast<Index>(std::uniform_int_distribution<long long>(0, max_start)(rng));
    segs.push_back({static_cast<int>(i), start});
  }
  std::shuffle(segs.begin(), segs.end(), rng);
  return segs;
}

/// Deterministic non-overlapping tiling for validation/test; the last
/// partial tile is dropped.
inline std::vector<Index> eval_tile_starts(Index clip_len, Index input_len) {
  if (clip_len < input_len)
    throw DataError("eval tiling: clip length " + std::to_string(clip_len) +
                    " < input length " + std::to_string(input_len));
  const Index n_tiles = clip_len / input_len;
  std::vector<Index> starts(static_cast<std::size_t>(n_tiles));
  for (Index t = 0; t < n_tiles; ++t) starts[static_cast<std::size_t>(t)] = t * input_len;
  return starts;
}

} // namespace samplecnn

#endif
