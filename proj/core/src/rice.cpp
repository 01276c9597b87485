#include "nomafl/rice.hpp"

#include "nomafl/error.hpp"

namespace nomafl {

void encode_rice(BitWriter& out, std::uint64_t delta, int k) {
  if (delta == 0) {
    throw DomainError("encode_rice: delta must be >= 1");
  }
  if (k < 0 || k > 63) {
    throw DomainError("encode_rice: parameter out of range");
  }
  const std::uint64_t v = delta - 1;
  out.write_ones(v >> k);
  out.write_bit(false);
  out.write_bits(v & ((std::uint64_t{1} << k) - 1), k);
}

std::uint64_t decode_rice(BitReader& in, int k, std::uint64_t max_quotient) {
  const std::size_t start = in.position();
  std::uint64_t q = 0;
  while (in.read_bit()) {
    if (++q > max_quotient) {
      throw DecodeError("rice quotient out of range", start);
    }
  }
  const std::uint64_t rem = in.read_bits(k);
  return (q << k) + rem + 1;
}

}  // namespace nomafl
