#pragma once

#include <cstdint>
#include <random>

namespace nomafl {

using Rng = std::mt19937_64;

// Independent random streams. Every consumer draws from a stream keyed by
// (seed, purpose, id, round) so that results never depend on the order in
// which users are processed.
enum class StreamTag : std::uint64_t {
  kUplinkFading = 1,
  kDownlinkFading = 2,
  kLocalTraining = 3,
  kPlacement = 4,
  kComputeSpeed = 5,
  kModelInit = 6,
  kDataset = 7,
  kPartition = 8,
};

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t stream_key(std::uint64_t seed, StreamTag tag, std::uint64_t id,
                                   std::uint64_t round) noexcept {
  std::uint64_t k = mix64(seed);
  k = mix64(k ^ static_cast<std::uint64_t>(tag));
  k = mix64(k ^ id);
  return mix64(k ^ round);
}

inline Rng make_stream(std::uint64_t seed, StreamTag tag, std::uint64_t id = 0,
                       std::uint64_t round = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(stream_key(seed, tag, id, round)),
                    static_cast<std::uint32_t>(stream_key(seed, tag, id, round) >> 32)};
  return Rng(seq);
}

}  // namespace nomafl
