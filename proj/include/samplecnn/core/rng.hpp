#ifndef SAMPLECNN_CORE_RNG_HPP
#define SAMPLECNN_CORE_RNG_HPP

#include <cstdint>
#include <random>

namespace samplecnn {

/// splitmix64 finalizer; decorrelates structured seed tuples.
inline std::uint64_t mix_seed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e9b5ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return mix_seed(mix_seed(a) ^ (0x9e3779b97f4a7c15ULL + b));
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix_seed(mix_seed(a, b) ^ (0xc2b2ae3d27d4eb4fULL + c));
}

inline std::mt19937_64 make_rng(std::uint64_t seed) {
  return std::mt19937_64(mix_seed(seed));
}

inline std::mt19937_64 make_rng(std::uint64_t a, std::uint64_t b) {
  return std::mt19937_64(mix_seed(a, b));
}

inline std::mt19937_64 make_rng(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return std::mt19937_64(mix_seed(a, b, c));
}

} // namespace samplecnn

#endif
