#include "nomafl/bitstream.hpp"

#include "nomafl/error.hpp"

namespace nomafl {

void BitWriter::write_bit(bool bit) {
  if (bits_ % 8 == 0) bytes_.push_back(0);
  if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (bits_ % 8));
  ++bits_;
}

void BitWriter::write_bits(std::uint64_t value, int count) {
  for (int i = count - 1; i >= 0; --i) {
    write_bit(((value >> i) & 1u) != 0);
  }
}

void BitWriter::write_ones(std::uint64_t count) {
  for (std::uint64_t i = 0; i < count; ++i) write_bit(true);
}

bool BitReader::read_bit() {
  if (pos_ >= bytes_.size() * 8) {
    throw DecodeError("unexpected end of bitstream", pos_);
  }
  const bool bit = ((bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1u) != 0;
  ++pos_;
  return bit;
}

std::uint64_t BitReader::read_bits(int count) {
  if (static_cast<std::size_t>(count) > remaining()) {
    throw DecodeError("unexpected end of bitstream", pos_);
  }
  std::uint64_t value = 0;
  for (int i = 0; i < count; ++i) {
    value = (value << 1) | static_cast<std::uint64_t>(read_bit());
  }
  return value;
}

}  // namespace nomafl
