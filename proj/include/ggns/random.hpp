#pragma once

#include <cstdint>
#include <random>

namespace ggns {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for the stream identified by (base, a, b). Streams depend only on the
/// triple, never on which worker consumes them.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
  return mix64(mix64(mix64(base) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

inline Rng make_stream(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
  return Rng(derive_seed(base, a, b));
}

}  // namespace ggns
