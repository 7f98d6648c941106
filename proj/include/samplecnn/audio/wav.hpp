#ifndef SAMPLECNN_AUDIO_WAV_HPP
#define SAMPLECNN_AUDIO_WAV_HPP

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "samplecnn/audio/clip.hpp"
#include "samplecnn/core/error.hpp"

namespace samplecnn {

namespace detail {

inline std::uint32_t read_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t read_u16le(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline void write_u32le(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline void write_u16le(std::ostream& os, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 2);
}

} // namespace detail

/// Decodes a RIFF/WAVE file. PCM 8/16/24-bit integer and 32-bit IEEE float
/// are supported; multi-channel audio is averaged down to mono. Integer
/// samples are scaled by 2^(bits-1) into [-1, 1).
inline AudioClip load_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("load_wav: cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw FormatError("load_wav: " + path + " is not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
    const std::uint32_t chunk_len = detail::read_u32le(bytes.data() + pos + 4);
    pos += 8;
    if (pos + chunk_len > bytes.size())
      throw FormatError("load_wav: truncated chunk in " + path);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (chunk_len < 16) throw FormatError("load_wav: short fmt chunk in " + path);
      const unsigned char* f = bytes.data() + pos;
      format = detail::read_u16le(f);
      channels = detail::read_u16le(f + 2);
      rate = detail::read_u32le(f + 4);
      bits = detail::read_u16le(f + 14);
      // WAVE_FORMAT_EXTENSIBLE wraps the real format in a GUID.
      if (format == 0xfffe && chunk_len >= 40)
        format = detail::read_u16le(f + 24);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = bytes.data() + pos;
      data_len = chunk_len;
    }
    pos += chunk_len + (chunk_len & 1); // chunks are word-aligned
  }

  if (!have_fmt || data == nullptr)
    throw FormatError("load_wav: missing fmt/data chunk in " + path);
  if (channels == 0 || rate == 0)
    throw FormatError("load_wav: bad fmt chunk in " + path);

  const bool is_pcm = format == 1;
  const bool is_float = format == 3;
  if (!is_pcm && !is_float)
    throw UnsupportedError("load_wav: unsupported codec tag " + std::to_string(format) +
                           " in " + path);
  if (is_pcm && bits != 8 && bits != 16 && bits != 24)
    throw UnsupportedError("load_wav: unsupported PCM depth " + std::to_string(bits) +
                           " in " + path);
  if (is_float && bits != 32)
    throw UnsupportedError("load_wav: unsupported float depth " + std::to_string(bits) +
                           " in " + path);

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frame_size = bytes_per_sample * channels;
  if (frame_size == 0 || data_len < frame_size)
    throw FormatError("load_wav: empty data chunk in " + path);
  const std::size_t n_frames = data_len / frame_size;

  AudioClip clip;
  clip.sample_rate_hz = static_cast<int>(rate);
  clip.samples.resize(static_cast<Index>(n_frames));
  for (std::size_t t = 0; t < n_frames; ++t) {
    double acc = 0.0;
    for (unsigned c = 0; c < channels; ++c) {
      const unsigned char* s = data + t * frame_size + c * bytes_per_sample;
      double v = 0.0;
      if (is_float) {
        float f;
        std::memcpy(&f, s, 4);
        v = f;
      } else if (bits == 8) {
        // 8-bit WAV is unsigned with a 128 midpoint.
        v = (static_cast<int>(s[0]) - 128) / 128.0;
      } else if (bits == 16) {
        std::int16_t i = static_cast<std::int16_t>(s[0] | (s[1] << 8));
        v = i / 32768.0;
      } else { // 24
        std::int32_t i = s[0] | (s[1] << 8) | (s[2] << 16);
        if (i & 0x800000) i |= ~0xffffff;
        v = i / 8388608.0;
      }
      acc += v;
    }
    clip.samples[static_cast<Index>(t)] = static_cast<float>(acc / channels);
  }
  validate_clip(clip, "load_wav: " + path);
  return clip;
}

/// Writes a mono 16-bit PCM WAV. Samples are clamped to [-1, 1).
inline void save_wav(const std::string& path, const AudioClip& clip) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("save_wav: cannot open " + path + " for writing");
  const std::uint32_t n = static_cast<std::uint32_t>(clip.samples.size());
  const std::uint32_t data_len = n * 2;
  os.write("RIFF", 4);
  detail::write_u32le(os, 36 + data_len);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  detail::write_u32le(os, 16);
  detail::write_u16le(os, 1); // PCM
  detail::write_u16le(os, 1); // mono
  detail::write_u32le(os, static_cast<std::uint32_t>(clip.sample_rate_hz));
  detail::write_u32le(os, static_cast<std::uint32_t>(clip.sample_rate_hz) * 2);
  detail::write_u16le(os, 2);
  detail::write_u16le(os, 16);
  os.write("data", 4);
  detail::write_u32le(os, data_len);
  for (Index i = 0; i < clip.samples.size(); ++i) {
    double v = std::clamp(static_cast<double>(clip.samples[i]), -1.0, 32767.0 / 32768.0);
    std::int16_t q = static_cast<std::int16_t>(std::lrint(v * 32768.0));
    detail::write_u16le(os, static_cast<std::uint16_t>(q));
  }
  if (!os) throw DataError("save_wav: write failed for " + path);
}

} // namespace samplecnn

#endif
