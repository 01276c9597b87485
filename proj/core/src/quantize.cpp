#include <algorithm>
#include <cfenv>
#include <cmath>

#include "nomafl/bitstream.hpp"
#include "nomafl/compress.hpp"
#include "nomafl/error.hpp"

namespace nomafl {

namespace {

double levels(int bits) { return std::ldexp(1.0, bits) - 1.0; }

void check_bits(int bits) {
  if (bits < 1 || bits > 32) {
    throw DomainError("quantization bit length must be in [1, 32]");
  }
}

}  // namespace

QuantBitLength quant_bit_length(std::uint64_t gradient_bits, std::uint64_t budget_bits) {
  if (gradient_bits == 0) {
    throw DomainError("quant_bit_length: gradient size must be positive");
  }
  if (budget_bits == 0) {
    throw OverBudgetError("quant_bit_length: zero bit budget");
  }
  if (budget_bits >= gradient_bits) return {32, false};
  // floor(32 / (G / m)) evaluated exactly as floor(32 m / G).
  // budget < gradient here, so 32 * budget only overflows for absurd sizes.
  const auto b = budget_bits <= UINT64_MAX / 32
                     ? static_cast<int>(budget_bits * 32 / gradient_bits)
                     : static_cast<int>(32.0L * budget_bits / gradient_bits);
  if (b < 1) return {1, true};
  return {b, false};
}

QuantizedUpdate quantize(std::span<const double> values, int bits) {
  check_bits(bits);
  const double a = levels(bits);
  QuantizedUpdate out;
  out.bit_length = bits;
  out.codes.resize(values.size());
  // nearbyint honours the current rounding mode; pin it to ties-to-even.
  const int saved = std::fegetround();
  std::fesetround(FE_TONEAREST);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = std::clamp(values[i], -1.0, 1.0);
    const double t = (v + 1.0) / 2.0;
    out.codes[i] = static_cast<std::uint32_t>(std::nearbyint(a * t));
  }
  std::fesetround(saved);
  out.payload_bits = kQuantHeaderBits + values.size() * static_cast<std::uint64_t>(bits);
  return out;
}

std::vector<double> dequantize(const QuantizedUpdate& update) {
  check_bits(update.bit_length);
  const double a = levels(update.bit_length);
  std::vector<double> out(update.codes.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = 2.0 * (static_cast<double>(update.codes[i]) / a) - 1.0;
  }
  return out;
}

std::vector<std::uint8_t> serialize(const QuantizedUpdate& update) {
  check_bits(update.bit_length);
  BitWriter w;
  w.write_bits(static_cast<std::uint64_t>(update.bit_length), 8);
  for (std::uint32_t code : update.codes) {
    w.write_bits(code, update.bit_length);
  }
  return std::move(w).release();
}

QuantizedUpdate deserialize_quantized(std::span<const std::uint8_t> bytes,
                                      std::size_t param_count) {
  BitReader r(bytes);
  QuantizedUpdate out;
  out.bit_length = static_cast<int>(r.read_bits(8));
  if (out.bit_length < 1 || out.bit_length > 32) {
    throw DecodeError("invalid quantization bit length " + std::to_string(out.bit_length), 0);
  }
  out.payload_bits = kQuantHeaderBits + param_count * static_cast<std::uint64_t>(out.bit_length);
  const std::size_t expected_bytes = (out.payload_bits + 7) / 8;
  if (bytes.size() < expected_bytes) {
    throw DecodeError("truncated quantized payload", bytes.size() * 8);
  }
  if (bytes.size() > expected_bytes) {
    throw DecodeError("trailing bytes after quantized payload", expected_bytes * 8);
  }
  out.codes.resize(param_count);
  for (auto& code : out.codes) {
    code = static_cast<std::uint32_t>(r.read_bits(out.bit_length));
  }
  return out;
}

EncodedUpdate encode_quantized(std::span<const double> values, std::uint64_t budget_bits,
                               int forced_bits) {
  int bits = forced_bits;
  if (bits == 0) {
    if (budget_bits <= kQuantHeaderBits) {
      throw OverBudgetError("budget of " + std::to_string(budget_bits) +
                            " bits does not cover the quantization header");
    }
    const auto choice = quant_bit_length(32 * static_cast<std::uint64_t>(values.size()),
                                         budget_bits - kQuantHeaderBits);
    if (choice.over_budget) {
      throw OverBudgetError("budget of " + std::to_string(budget_bits) +
                            " bits is below one bit per parameter");
    }
    bits = choice.bits;
  }
  const QuantizedUpdate q = quantize(values, bits);
  EncodedUpdate out;
  out.codec = Codec::kQuantize;
  out.wire = serialize(q);
  out.payload_bits = q.payload_bits;
  out.parameter = bits;
  out.keep_ratio = 1.0;
  out.kept_count = values.size();
  return out;
}

}  // namespace nomafl
