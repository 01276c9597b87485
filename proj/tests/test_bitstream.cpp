#include <gtest/gtest.h>

#include <cstdint>
#include <random>
#include <vector>

#include "nomafl/bitstream.hpp"
#include "nomafl/error.hpp"
#include "nomafl/rice.hpp"

namespace nomafl {
namespace {

TEST(BitWriter, MsbFirstAndZeroPadded) {
  BitWriter w;
  w.write_bit(true);
  w.write_bits(0b011, 3);
  EXPECT_EQ(w.bit_count(), 4u);
  ASSERT_EQ(w.bytes().size(), 1u);
  EXPECT_EQ(w.bytes()[0], 0b1011'0000);
  w.write_bits(0xABCD, 16);
  EXPECT_EQ(w.bit_count(), 20u);
  EXPECT_EQ(w.bytes(), (std::vector<std::uint8_t>{0xBA, 0xBC, 0xD0}));
}

TEST(BitWriter, WriteOnesAcrossBytes) {
  BitWriter w;
  w.write_ones(13);
  EXPECT_EQ(w.bytes(), (std::vector<std::uint8_t>{0xFF, 0xF8}));
}

TEST(BitReader, RoundTripRandomWidths) {
  std::mt19937_64 rng(1);
  std::vector<std::pair<std::uint64_t, int>> items;
  BitWriter w;
  for (int i = 0; i < 2000; ++i) {
    const int width = static_cast<int>(rng() % 64) + 1;
    const std::uint64_t v = width == 64 ? rng() : rng() & ((std::uint64_t{1} << width) - 1);
    items.emplace_back(v, width);
    w.write_bits(v, width);
  }
  const auto bytes = std::move(w).release();
  BitReader r(bytes);
  for (const auto& [v, width] : items) EXPECT_EQ(r.read_bits(width), v);
  EXPECT_LT(r.remaining(), 8u);
}

TEST(BitReader, OverrunReportsBitOffset) {
  const std::vector<std::uint8_t> bytes{0xFF};
  BitReader r(bytes);
  r.read_bits(6);
  try {
    r.read_bits(4);
    FAIL();
  } catch (const DecodeError& e) {
    EXPECT_GE(e.bit_offset(), 6u);
    EXPECT_LE(e.bit_offset(), 8u);
  }
}

TEST(Rice, SmallestSymbol) {
  BitWriter w;
  encode_rice(w, 1, 2);
  EXPECT_EQ(w.bit_count(), 3u);
  EXPECT_EQ(w.bytes()[0], 0x00);
}

TEST(Rice, QuotientOneRemainderOne) {
  BitWriter w;
  encode_rice(w, 6, 2);  // q = 1, rem = 1 -> "10" "01"
  EXPECT_EQ(w.bit_count(), 4u);
  EXPECT_EQ(w.bytes()[0], 0b1001'0000);
  EXPECT_EQ(rice_length(6, 2), 4u);
}

TEST(Rice, ExhaustiveRoundTrip) {
  for (int k = 1; k <= 8; ++k) {
    BitWriter w;
    std::uint64_t bits = 0;
    for (std::uint64_t d = 1; d <= 1000; ++d) {
      encode_rice(w, d, k);
      bits += rice_length(d, k);
    }
    EXPECT_EQ(w.bit_count(), bits);
    const auto bytes = std::move(w).release();
    BitReader r(bytes);
    for (std::uint64_t d = 1; d <= 1000; ++d) ASSERT_EQ(decode_rice(r, k), d) << "k=" << k;
  }
}

TEST(Rice, RejectsRunawayQuotient) {
  const std::vector<std::uint8_t> bytes(4, 0xFF);
  BitReader r(bytes);
  EXPECT_THROW(decode_rice(r, 2, 10), DecodeError);
}

TEST(Rice, TruncatedStream) {
  BitWriter w;
  encode_rice(w, 40, 1);
  auto bytes = std::move(w).release();
  bytes.pop_back();
  BitReader r(bytes);
  EXPECT_THROW(decode_rice(r, 1), DecodeError);
}

TEST(Rice, InvalidArguments) {
  BitWriter w;
  EXPECT_THROW(encode_rice(w, 0, 2), DomainError);
}

}  // namespace
}  // namespace nomafl
