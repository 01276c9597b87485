#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nomafl/channel.hpp"

namespace nomafl {

struct ReceivedPower {
  int user_id = 0;
  double power_w = 0.0;  // p_k |h_k|^2
};

struct RateAllocation {
  int user_id = 0;
  int sic_position = 0;  // 1 = decoded first
  double rate_bps_hz = 0.0;
  std::uint64_t bit_budget = 0;
  double received_power_w = 0.0;
};

// Strongest first; equal powers decode in ascending user_id order.
std::vector<ReceivedPower> sic_order(std::span<const ReceivedPower> powers);

// Achievable SIC rates for powers already in decoding order. User k sees the
// not-yet-decoded users k+1..K as interference, scaled by tau.
std::vector<double> noma_rates(std::span<const double> ordered_powers_w, double noise_w,
                               double tau);

// Interference-free rate log2(1 + P / (tau sigma^2)).
double tdma_rate(double power_w, double noise_w, double tau);

// floor(B * R * t) bits.
std::uint64_t bit_budget(double rate_bps_hz, double bandwidth_hz, double slot_s);

// SIC order + rates + budgets for one cohort.
std::vector<RateAllocation> allocate_noma(std::span<const ReceivedPower> powers,
                                          const ChannelParams& params);

// Broadcast time of the uncompressed model: the slowest downlink among the
// receivers sets the pace. Throws DomainError on a zero-capacity link.
double downlink_time(std::uint64_t param_count, std::span<const double> downlink_gains,
                     const ChannelParams& params);

// B R t / |D_k|: bits deliverable per local sample.
double effective_capacity(double rate_bps_hz, double bandwidth_hz, double slot_s,
                          std::size_t dataset_size);

// Jain's fairness index (mean)^2 / mean(x^2), in (0, 1].
double jain_index(std::span<const double> values);

}  // namespace nomafl
