#pragma once

#include <cstdint>

#include "nomafl/bitstream.hpp"

namespace nomafl {

// Rice code (Golomb with M = 2^k) for positive integers: q = (delta-1) >> k
// as q one-bits and a terminating zero, then (delta-1) mod 2^k in k bits.
void encode_rice(BitWriter& out, std::uint64_t delta, int k);

// Inverse of encode_rice. A unary run longer than `max_quotient` is reported
// as a DecodeError instead of being read to the end of the stream.
std::uint64_t decode_rice(BitReader& in, int k,
                          std::uint64_t max_quotient = UINT64_MAX);

// Code length in bits.
constexpr std::uint64_t rice_length(std::uint64_t delta, int k) noexcept {
  return ((delta - 1) >> k) + 1 + static_cast<std::uint64_t>(k);
}

}  // namespace nomafl
