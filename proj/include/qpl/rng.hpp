#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace qpl {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Order-sensitive combination of several words into one seed. Used to derive
// independent per-replication and per-stage streams from a base seed.
constexpr std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x51ed270b27a1c2f3ULL;
  for (auto p : parts) h = mix64(h ^ mix64(p));
  return h;
}

// Stream tags so that different consumers of one seed never share draws.
enum class Stream : std::uint64_t {
  Data = 1,
  Candidates = 2,
  Init = 3,
  MonteCarlo = 4,
};

inline Rng make_rng(std::uint64_t seed, Stream stream) {
  return Rng(derive_seed({seed, static_cast<std::uint64_t>(stream)}));
}

}  // namespace qpl
