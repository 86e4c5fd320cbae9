#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace upsilon {

using Rng = std::mt19937_64;

/// Derives an independent stream seed from a base seed and a key path
/// (for example: candidate index, subspace dimension, sample index).
/// Streams depend only on the key, never on how work is split across workers.
inline std::uint64_t stream_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(seed);
  for (std::uint64_t k : keys) h = mix(h ^ mix(k));
  return h;
}

inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  return Rng(stream_seed(seed, keys));
}

inline long uniform_int(Rng& rng, long lo, long hi) {
  return std::uniform_int_distribution<long>(lo, hi)(rng);
}

inline bool coin(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

}  // namespace upsilon
