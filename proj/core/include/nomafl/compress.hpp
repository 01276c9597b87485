#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace nomafl {

inline constexpr std::uint64_t kQuantHeaderBits = 8;
inline constexpr std::uint64_t kSparseHeaderBits = 8 + 32;

// ---------------------------------------------------------------- quantization

struct QuantBitLength {
  int bits = 32;
  bool over_budget = false;  // floor(32 / r_q) was 0 and got clamped to 1
};

// r_q = max(G / m, 1); b = floor(32 / r_q) clamped to [1, 32].
// Throws OverBudgetError when m == 0.
QuantBitLength quant_bit_length(std::uint64_t gradient_bits, std::uint64_t budget_bits);

struct QuantizedUpdate {
  int bit_length = 32;
  std::vector<std::uint32_t> codes;
  std::uint64_t payload_bits = 0;
};

// Uniform grid with 2^b - 1 steps over [-1, 1]; inputs are clamped first and
// ties round to even.
QuantizedUpdate quantize(std::span<const double> values, int bits);
std::vector<double> dequantize(const QuantizedUpdate& update);

// [u8 b][codes, b bits each], MSB first, zero padded.
std::vector<std::uint8_t> serialize(const QuantizedUpdate& update);
QuantizedUpdate deserialize_quantized(std::span<const std::uint8_t> bytes,
                                      std::size_t param_count);

// --------------------------------------------------------------- sparsification

// Rice parameter for a keep ratio r in (0, 1):
// 1 + floor(log2(ln(phi - 1) / ln(1 - r))), never below 1.
int rice_parameter(double keep_ratio);

// Expected Rice bits per kept position for a uniform mask of density r.
// Defined on (0, 1]; at r = 1 it takes its limit value 2.
double avg_position_bits(double keep_ratio);

// Keep ratio r with G r + (G r / 32) * avg_position_bits(r) = m - header,
// capped at 1. Throws OverBudgetError when the budget does not cover the
// header or the root falls below the bisection bracket.
double solve_sparsity_ratio(std::uint64_t gradient_bits, std::uint64_t budget_bits,
                            std::uint64_t header_bits = kSparseHeaderBits);

struct SparseUpdate {
  int rice_parameter = 1;
  std::uint32_t kept_count = 0;
  std::vector<std::uint8_t> positions;  // Rice-coded index deltas
  std::uint64_t position_bits = 0;
  std::vector<float> values;
  std::uint64_t payload_bits = 0;
};

// Keeps max(1, round(r P)) largest-magnitude entries (ties: lower index).
SparseUpdate sparsify(std::span<const double> values, double keep_ratio);
std::vector<double> desparsify(const SparseUpdate& update, std::size_t param_count);

// [u8 b*][u32 BE kept_count][Rice symbols][kept_count x f32 BE], one
// continuous MSB-first bitstream, zero padded.
std::vector<std::uint8_t> serialize(const SparseUpdate& update);
SparseUpdate deserialize_sparse(std::span<const std::uint8_t> bytes, std::size_t param_count);

// ----------------------------------------------------------- adaptive encoding

enum class Codec { kQuantize, kSparsify };

struct EncodedUpdate {
  Codec codec = Codec::kQuantize;
  std::vector<std::uint8_t> wire;
  std::uint64_t payload_bits = 0;
  int parameter = 0;          // b for quantization, b* for sparsification
  double keep_ratio = 1.0;    // solved r_s (1 for quantization)
  std::size_t kept_count = 0;
};

// Largest quantization that fits `budget_bits`, header included.
// `forced_bits` in [1, 32] bypasses the budget (testing / lossless runs).
// Throws OverBudgetError when not even 1-bit codes fit.
EncodedUpdate encode_quantized(std::span<const double> values, std::uint64_t budget_bits,
                               int forced_bits = 0);

// Sparse payload guaranteed to fit `budget_bits`; the kept count is shrunk
// if the realized Rice cost overshoots the expected cost. Throws
// OverBudgetError when a single value and position do not fit.
EncodedUpdate encode_sparse(std::span<const double> values, std::uint64_t budget_bits);

std::vector<double> decode(Codec codec, std::span<const std::uint8_t> wire,
                           std::size_t param_count);

// ---------------------------------------------------------- error feedback

// g + residual: the vector that actually gets compressed.
std::vector<double> apply_residual(std::span<const double> gradient,
                                   std::span<const double> residual);

// What the compressor failed to deliver: compensated - transmitted.
std::vector<double> update_residual(std::span<const double> compensated,
                                    std::span<const double> transmitted);

}  // namespace nomafl
