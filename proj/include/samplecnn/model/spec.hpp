#ifndef SAMPLECNN_MODEL_SPEC_HPP
#define SAMPLECNN_MODEL_SPEC_HPP

#include <cmath>
#include <string>
#include <vector>

#include "samplecnn/core/error.hpp"
#include "samplecnn/core/types.hpp"

namespace samplecnn {

enum class Family { MelFrame, RawFrame, RawSample };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::MelFrame: return "mel_frame";
    case Family::RawFrame: return "raw_frame";
    case Family::RawSample: return "raw_sample";
  }
  return "?";
}

inline Family parse_family(const std::string& s) {
  if (s == "mel_frame") return Family::MelFrame;
  if (s == "raw_frame") return Family::RawFrame;
  if (s == "raw_sample") return Family::RawSample;
  throw ConfigError("unknown model family '" + s + "'");
}

enum class LayerKind { StridedConv, ConvBlock, FinalConv, OutputDense };

inline const char* layer_kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::StridedConv: return "strided_conv";
    case LayerKind::ConvBlock: return "conv_block";
    case LayerKind::FinalConv: return "final_conv";
    case LayerKind::OutputDense: return "output_dense";
  }
  return "?";
}

struct LayerSpec {
  LayerKind kind = LayerKind::ConvBlock;
  int filter_len = 1;
  int stride = 1;
  int pool_len = 1; // 1 = no pooling
  int out_channels = 0;
};

/// m^n-DCNN description: n modules of filter/pool length m under a
/// strided first convolution (raw families) or a mel-spectrogram input
/// (mel family). input_len is samples for raw, frames for mel, and must
/// equal first_stride * m^n (raw) or m^n (mel).
struct ModelSpec {
  Family family = Family::RawSample;
  int m = 3;
  int n = 9;
  int input_len = 59049;
  int first_filter_len = 0; // 0 -> first_stride
  int first_stride = 0;     // 0 -> input_len / m^n
  int first_channels = 0;   // 0 -> channel_schedule[0]
  std::vector<int> channel_schedule; // empty -> default pattern
  int mel_bands = 128;
  int n_tags = 50;
  double dropout = 0.5;
};

inline long ipow(int base, int exp) {
  long r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

/// Channel pattern following the reference 3^9 layout: roughly the first
/// 2/9 of the modules at 128, the last at 512, 256 in between.
inline std::vector<int> default_channel_schedule(int n) {
  std::vector<int> ch(static_cast<std::size_t>(n));
  const int n128 = std::max(1, static_cast<int>(std::lround(2.0 * n / 9.0)));
  for (int i = 0; i < n; ++i) {
    if (n >= 2 && i == n - 1)
      ch[static_cast<std::size_t>(i)] = 512;
    else if (i < n128)
      ch[static_cast<std::size_t>(i)] = 128;
    else
      ch[static_cast<std::size_t>(i)] = 256;
  }
  return ch;
}

/// Fills the derived fields and validates every ModelSpec invariant.
inline ModelSpec resolve_spec(const ModelSpec& in) {
  ModelSpec s = in;
  if (s.m < 2) throw ConfigError("ModelSpec: m must be >= 2");
  if (s.n < 1) throw ConfigError("ModelSpec: n must be >= 1");
  if (s.n_tags < 1) throw ConfigError("ModelSpec: n_tags must be >= 1");
  if (s.dropout < 0 || s.dropout >= 1) throw ConfigError("ModelSpec: dropout must be in [0,1)");
  if (s.input_len < 1) throw ConfigError("ModelSpec: input_len must be positive");

  const long mn = ipow(s.m, s.n);
  if (s.family == Family::MelFrame) {
    if (s.input_len != mn)
      throw ConfigError("ModelSpec: mel input frames " + std::to_string(s.input_len) +
                        " != m^n = " + std::to_string(mn));
    if (s.mel_bands < 1) throw ConfigError("ModelSpec: mel_bands must be >= 1");
    s.first_stride = 0;
    s.first_filter_len = 0;
    s.first_channels = 0;
  } else {
    if (s.first_stride == 0) {
      if (s.input_len % mn != 0)
        throw ConfigError("ModelSpec: input_len " + std::to_string(s.input_len) +
                          " is not a multiple of m^n = " + std::to_string(mn));
      s.first_stride = static_cast<int>(s.input_len / mn);
    }
    if (static_cast<long>(s.first_stride) * mn != s.input_len)
      throw ConfigError("ModelSpec: input_len " + std::to_string(s.input_len) +
                        " != first_stride * m^n = " +
                        std::to_string(static_cast<long>(s.first_stride) * mn));
    if (s.first_filter_len == 0) s.first_filter_len = s.first_stride;
    if (s.first_filter_len < s.first_stride)
      throw ConfigError("ModelSpec: first_filter_len must be >= first_stride");
  }

  if (s.channel_schedule.empty()) s.channel_schedule = default_channel_schedule(s.n);
  if (static_cast<int>(s.channel_schedule.size()) != s.n)
    throw ConfigError("ModelSpec: channel_schedule has " +
                      std::to_string(s.channel_schedule.size()) + " entries, expected n = " +
                      std::to_string(s.n));
  for (int c : s.channel_schedule)
    if (c < 1) throw ConfigError("ModelSpec: channel_schedule entries must be positive");
  if (s.family != Family::MelFrame && s.first_channels == 0)
    s.first_channels = s.channel_schedule.front();
  return s;
}

/// Input channel count the network expects (1 for raw waveforms).
inline int input_channels(const ModelSpec& s) {
  return s.family == Family::MelFrame ? s.mel_bands : 1;
}

/// Expands the m^n grammar into the concrete layer list.
inline std::vector<LayerSpec> build_mn(const ModelSpec& spec) {
  const ModelSpec s = resolve_spec(spec);
  std::vector<LayerSpec> layers;
  if (s.family != Family::MelFrame) {
    LayerSpec first;
    first.kind = LayerKind::StridedConv;
    first.filter_len = s.first_filter_len;
    first.stride = s.first_stride;
    first.out_channels = s.first_channels;
    layers.push_back(first);
  }
  for (int i = 0; i < s.n; ++i) {
    LayerSpec block;
    block.kind = LayerKind::ConvBlock;
    block.filter_len = s.m;
    block.stride = 1;
    block.pool_len = s.m;
    block.out_channels = s.channel_schedule[static_cast<std::size_t>(i)];
    layers.push_back(block);
  }
  LayerSpec final_conv;
  final_conv.kind = LayerKind::FinalConv;
  final_conv.filter_len = 1;
  final_conv.out_channels = s.channel_schedule.back();
  layers.push_back(final_conv);

  LayerSpec output;
  output.kind = LayerKind::OutputDense;
  output.filter_len = 1;
  output.out_channels = s.n_tags;
  layers.push_back(output);
  return layers;
}

struct LayerShape {
  int channels = 0;
  int time = 0;
};

/// Output (channels x time) of every layer; the final entry is
/// (n_tags x 1). Mirrors the reference architecture table bookkeeping.
inline std::vector<LayerShape> plan_shapes(const ModelSpec& spec) {
  const ModelSpec s = resolve_spec(spec);
  const auto layers = build_mn(s);
  std::vector<LayerShape> shapes;
  shapes.reserve(layers.size());
  int time = s.input_len;
  for (const auto& l : layers) {
    switch (l.kind) {
      case LayerKind::StridedConv:
        time = time / l.stride;
        break;
      case LayerKind::ConvBlock:
        if (time % l.pool_len != 0)
          throw ConfigError("ModelSpec: time " + std::to_string(time) +
                            " not divisible by pool " + std::to_string(l.pool_len));
        time = time / l.pool_len;
        break;
      case LayerKind::FinalConv:
      case LayerKind::OutputDense:
        break;
    }
    shapes.push_back({l.out_channels, time});
  }
  if (shapes[shapes.size() - 2].time != 1)
    throw ConfigError("ModelSpec: temporal length entering the final 1-width conv is " +
                      std::to_string(shapes[shapes.size() - 2].time) + ", must be 1");
  return shapes;
}

struct LayerParamCount {
  long conv = 0; // weights + bias, the architecture-table convention
  long bn = 0;   // gamma + beta (learnable only)
};

/// Per-layer conv parameter counts (out*in*len + out); batch-norm
/// parameters reported separately.
inline std::vector<LayerParamCount> count_params(const ModelSpec& spec) {
  const ModelSpec s = resolve_spec(spec);
  const auto layers = build_mn(s);
  std::vector<LayerParamCount> counts;
  counts.reserve(layers.size());
  long in_ch = input_channels(s);
  for (const auto& l : layers) {
    LayerParamCount c;
    c.conv = static_cast<long>(l.out_channels) * in_ch * l.filter_len + l.out_channels;
    if (l.kind != LayerKind::OutputDense) c.bn = 2L * l.out_channels;
    counts.push_back(c);
    in_ch = l.out_channels;
  }
  return counts;
}

inline long total_conv_params(const ModelSpec& spec) {
  long total = 0;
  for (const auto& c : count_params(spec)) total += c.conv;
  return total;
}

} // namespace samplecnn

#endif
