#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace nomafl {

// Appends bits most-significant-first; the last byte is zero-padded.
class BitWriter {
 public:
  void write_bit(bool bit);
  // Low `count` bits of `value`, MSB first. count <= 64.
  void write_bits(std::uint64_t value, int count);
  void write_ones(std::uint64_t count);

  std::size_t bit_count() const noexcept { return bits_; }
  const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }
  std::vector<std::uint8_t> release() && { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t bits_ = 0;
};

// Reads bits most-significant-first. Running past the end throws
// DecodeError carrying the bit offset.
class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> bytes, std::size_t bit_offset = 0)
      : bytes_(bytes), pos_(bit_offset) {}

  bool read_bit();
  std::uint64_t read_bits(int count);

  std::size_t position() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() * 8 - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace nomafl
