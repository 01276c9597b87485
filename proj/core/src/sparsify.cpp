#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>

#include "nomafl/bitstream.hpp"
#include "nomafl/compress.hpp"
#include "nomafl/error.hpp"
#include "nomafl/rice.hpp"

namespace nomafl {

namespace {

constexpr double kGolden = std::numbers::phi;
constexpr double kRatioFloor = 1e-8;
constexpr int kMaxBisections = 200;
constexpr double kRatioTolerance = 1e-9;

// Indices ordered by descending magnitude, lower index first on ties.
std::vector<std::uint32_t> magnitude_order(std::span<const double> values) {
  std::vector<std::uint32_t> order(values.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    const double ma = std::abs(values[a]);
    const double mb = std::abs(values[b]);
    if (ma != mb) return ma > mb;
    return a < b;
  });
  return order;
}

SparseUpdate build(std::span<const double> values, std::span<const std::uint32_t> kept_indices,
                   int rice_k) {
  std::vector<std::uint32_t> indices(kept_indices.begin(), kept_indices.end());
  std::sort(indices.begin(), indices.end());

  SparseUpdate out;
  out.rice_parameter = rice_k;
  out.kept_count = static_cast<std::uint32_t>(indices.size());
  BitWriter positions;
  std::int64_t prev = -1;
  out.values.reserve(indices.size());
  for (std::uint32_t idx : indices) {
    encode_rice(positions, static_cast<std::uint64_t>(static_cast<std::int64_t>(idx) - prev),
                rice_k);
    prev = idx;
    out.values.push_back(static_cast<float>(values[idx]));
  }
  out.position_bits = positions.bit_count();
  out.positions = std::move(positions).release();
  out.payload_bits = kSparseHeaderBits + out.position_bits + 32ull * out.kept_count;
  return out;
}

std::size_t kept_for_ratio(double keep_ratio, std::size_t param_count) {
  const auto s = static_cast<std::size_t>(
      std::llround(keep_ratio * static_cast<double>(param_count)));
  return std::clamp<std::size_t>(s, 1, param_count);
}

int rice_for_ratio(double keep_ratio) { return keep_ratio >= 1.0 ? 1 : rice_parameter(keep_ratio); }

}  // namespace

int rice_parameter(double keep_ratio) {
  if (!(keep_ratio > 0.0) || !(keep_ratio < 1.0)) {
    throw DomainError("rice_parameter: keep ratio must lie in (0, 1)");
  }
  const double ratio = std::log(kGolden - 1.0) / std::log1p(-keep_ratio);
  const int k = 1 + static_cast<int>(std::floor(std::log2(ratio)));
  return std::max(k, 1);
}

double avg_position_bits(double keep_ratio) {
  if (!(keep_ratio > 0.0) || keep_ratio > 1.0) {
    throw DomainError("avg_position_bits: keep ratio must lie in (0, 1]");
  }
  if (keep_ratio == 1.0) return 2.0;
  const int k = rice_parameter(keep_ratio);
  const double miss = std::exp(std::ldexp(1.0, k) * std::log1p(-keep_ratio));
  return static_cast<double>(k) + 1.0 / (1.0 - miss);
}

double solve_sparsity_ratio(std::uint64_t gradient_bits, std::uint64_t budget_bits,
                            std::uint64_t header_bits) {
  if (gradient_bits == 0) {
    throw DomainError("solve_sparsity_ratio: gradient size must be positive");
  }
  if (budget_bits <= header_bits) {
    throw OverBudgetError("budget of " + std::to_string(budget_bits) +
                          " bits does not cover the sparse header");
  }
  const double g = static_cast<double>(gradient_bits);
  const double available = static_cast<double>(budget_bits - header_bits);
  const auto f = [&](double r) { return g * r + (g * r / 32.0) * avg_position_bits(r) - available; };

  if (f(1.0) <= 0.0) return 1.0;
  double lo = kRatioFloor;
  double hi = 1.0;
  double f_lo = f(lo);
  double f_hi = f(hi);
  if (f_lo > 0.0) {
    throw OverBudgetError("budget of " + std::to_string(budget_bits) +
                          " bits is below the smallest sparse payload");
  }
  for (int i = 0; i < kMaxBisections && hi - lo > kRatioTolerance * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    if (f_mid <= 0.0) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
      f_hi = f_mid;
    }
  }
  return std::abs(f_lo) <= std::abs(f_hi) ? lo : hi;
}

SparseUpdate sparsify(std::span<const double> values, double keep_ratio) {
  if (values.empty()) {
    throw DomainError("sparsify: empty vector");
  }
  if (!(keep_ratio > 0.0) || keep_ratio > 1.0) {
    throw DomainError("sparsify: keep ratio must lie in (0, 1]");
  }
  const std::size_t s = kept_for_ratio(keep_ratio, values.size());
  std::vector<std::uint32_t> order(values.size());
  std::iota(order.begin(), order.end(), 0u);
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(s - 1),
                   order.end(), [&](std::uint32_t a, std::uint32_t b) {
                     const double ma = std::abs(values[a]);
                     const double mb = std::abs(values[b]);
                     if (ma != mb) return ma > mb;
                     return a < b;
                   });
  return build(values, std::span(order).first(s), rice_for_ratio(keep_ratio));
}

std::vector<double> desparsify(const SparseUpdate& update, std::size_t param_count) {
  if (update.values.size() != update.kept_count) {
    throw DomainError("desparsify: value count does not match kept count");
  }
  std::vector<double> out(param_count, 0.0);
  BitReader positions(update.positions);
  const std::uint64_t max_q = (param_count >> update.rice_parameter) + 1;
  std::int64_t prev = -1;
  for (std::uint32_t i = 0; i < update.kept_count; ++i) {
    const std::size_t at = positions.position();
    const std::uint64_t delta = decode_rice(positions, update.rice_parameter, max_q);
    const auto idx = prev + static_cast<std::int64_t>(delta);
    if (idx >= static_cast<std::int64_t>(param_count)) {
      throw DecodeError("position beyond parameter count", at);
    }
    out[static_cast<std::size_t>(idx)] = static_cast<double>(update.values[i]);
    prev = idx;
  }
  return out;
}

std::vector<std::uint8_t> serialize(const SparseUpdate& update) {
  BitWriter w;
  w.write_bits(static_cast<std::uint64_t>(update.rice_parameter), 8);
  w.write_bits(update.kept_count, 32);
  BitReader positions(update.positions);
  for (std::uint64_t i = 0; i < update.position_bits; ++i) {
    w.write_bit(positions.read_bit());
  }
  for (float v : update.values) {
    w.write_bits(std::bit_cast<std::uint32_t>(v), 32);
  }
  return std::move(w).release();
}

SparseUpdate deserialize_sparse(std::span<const std::uint8_t> bytes, std::size_t param_count) {
  BitReader r(bytes);
  SparseUpdate out;
  out.rice_parameter = static_cast<int>(r.read_bits(8));
  if (out.rice_parameter < 1 || out.rice_parameter > 63) {
    throw DecodeError("invalid rice parameter " + std::to_string(out.rice_parameter), 0);
  }
  out.kept_count = static_cast<std::uint32_t>(r.read_bits(32));
  if (out.kept_count > param_count) {
    throw DecodeError("kept count exceeds parameter count", 8);
  }

  // Re-encode positions while validating them so the update owns a clean copy.
  BitWriter positions;
  const std::uint64_t max_q = (param_count >> out.rice_parameter) + 1;
  std::int64_t prev = -1;
  for (std::uint32_t i = 0; i < out.kept_count; ++i) {
    const std::size_t at = r.position();
    const std::uint64_t delta = decode_rice(r, out.rice_parameter, max_q);
    const auto idx = prev + static_cast<std::int64_t>(delta);
    if (idx >= static_cast<std::int64_t>(param_count)) {
      throw DecodeError("position beyond parameter count", at);
    }
    encode_rice(positions, delta, out.rice_parameter);
    prev = idx;
  }
  out.position_bits = positions.bit_count();
  out.positions = std::move(positions).release();

  out.values.reserve(out.kept_count);
  for (std::uint32_t i = 0; i < out.kept_count; ++i) {
    out.values.push_back(std::bit_cast<float>(static_cast<std::uint32_t>(r.read_bits(32))));
  }
  out.payload_bits = kSparseHeaderBits + out.position_bits + 32ull * out.kept_count;
  const std::size_t expected_bytes = (out.payload_bits + 7) / 8;
  if (bytes.size() > expected_bytes) {
    throw DecodeError("trailing bytes after sparse payload", expected_bytes * 8);
  }
  return out;
}

EncodedUpdate encode_sparse(std::span<const double> values, std::uint64_t budget_bits) {
  if (values.empty()) {
    throw DomainError("encode_sparse: empty vector");
  }
  const std::uint64_t gradient_bits = 32 * static_cast<std::uint64_t>(values.size());
  const double ratio = solve_sparsity_ratio(gradient_bits, budget_bits);
  const int k = rice_for_ratio(ratio);
  const auto order = magnitude_order(values);

  std::size_t s = kept_for_ratio(ratio, values.size());
  SparseUpdate update = build(values, std::span(order).first(s), k);
  while (update.payload_bits > budget_bits) {
    if (s == 1) {
      throw OverBudgetError("budget of " + std::to_string(budget_bits) +
                            " bits cannot carry one sparse value");
    }
    // Shrink proportionally to the overshoot, by at least one entry.
    const double scale = static_cast<double>(budget_bits - kSparseHeaderBits) /
                         static_cast<double>(update.payload_bits - kSparseHeaderBits);
    const auto scaled = static_cast<std::size_t>(std::floor(static_cast<double>(s) * scale));
    s = std::clamp<std::size_t>(scaled, 1, s - 1);
    update = build(values, std::span(order).first(s), k);
  }

  EncodedUpdate out;
  out.codec = Codec::kSparsify;
  out.wire = serialize(update);
  out.payload_bits = update.payload_bits;
  out.parameter = k;
  out.keep_ratio = ratio;
  out.kept_count = s;
  return out;
}

std::vector<double> decode(Codec codec, std::span<const std::uint8_t> wire,
                           std::size_t param_count) {
  if (codec == Codec::kQuantize) {
    return dequantize(deserialize_quantized(wire, param_count));
  }
  return desparsify(deserialize_sparse(wire, param_count), param_count);
}

std::vector<double> apply_residual(std::span<const double> gradient,
                                   std::span<const double> residual) {
  if (gradient.size() != residual.size()) {
    throw DomainError("apply_residual: dimension mismatch");
  }
  std::vector<double> out(gradient.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = gradient[i] + residual[i];
  return out;
}

std::vector<double> update_residual(std::span<const double> compensated,
                                    std::span<const double> transmitted) {
  if (compensated.size() != transmitted.size()) {
    throw DomainError("update_residual: dimension mismatch");
  }
  std::vector<double> out(compensated.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = compensated[i] - transmitted[i];
  return out;
}

}  // namespace nomafl
