#pragma once

#include <cstdint>
#include <random>

namespace storval {

/// SplitMix64 finalizer; used to turn (seed, counter) pairs into
/// well-separated engine seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

using Engine = std::mt19937_64;

/// Counter-based stream: the engine depends only on (seed, counter), so the
/// k-th stream can be produced in any order.
inline Engine stream_engine(std::uint64_t seed, std::uint64_t counter) {
  return Engine(splitmix64(splitmix64(seed) ^ splitmix64(counter + 0x632be59bd9b4e019ULL)));
}

inline Engine seeded_engine(std::uint64_t seed) { return Engine(splitmix64(seed)); }

}  // namespace storval
